#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace nkm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Errc {
  invalid_param,
  not_connected,
  index_out_of_range,
  empty_data,
  dimension_mismatch,
  max_iters_exceeded,
  too_large,
  singular_cluster,
  no_neighbors,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

// Exact (bit-level) equality of two dense expressions of the same shape.
template <typename A, typename B>
bool bits_equal(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

}  // namespace nkm
