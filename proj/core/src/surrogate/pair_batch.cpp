#include "ls/surrogate/pair_batch.hpp"

#include <algorithm>

namespace ls::surrogate {

void PairBatch::validate() const {
  if (z.shape() != y.shape()) {
    throw ad::ShapeError("pair batch: z " + ad::shape_str(z.shape()) + " vs y " +
                         ad::shape_str(y.shape()));
  }
  if (z.rank() < 2 || z.dim(0) != e.size()) {
    throw ad::ShapeError("pair batch: z " + ad::shape_str(z.shape()) + " does not hold " +
                         std::to_string(e.size()) + " rows");
  }
}

PairBatch concat(const PairBatch& a, const PairBatch& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  a.validate();
  b.validate();
  ad::Shape shape = a.z.shape();
  ad::Shape tail_b = b.z.shape();
  if (!std::equal(shape.begin() + 1, shape.end(), tail_b.begin() + 1, tail_b.end())) {
    throw ad::ShapeError("pair batch concat: " + ad::shape_str(shape) + " vs " +
                         ad::shape_str(tail_b));
  }
  shape[0] += tail_b[0];
  auto join = [&](const ad::Tensor& x, const ad::Tensor& w) {
    std::vector<double> v(x.data().begin(), x.data().end());
    v.insert(v.end(), w.data().begin(), w.data().end());
    return ad::Tensor(shape, std::move(v));
  };
  PairBatch out{join(a.z, b.z), join(a.y, b.y), a.e};
  out.e.insert(out.e.end(), b.e.begin(), b.e.end());
  return out;
}

}  // namespace ls::surrogate
