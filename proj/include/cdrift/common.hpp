// Shared aliases and the error type used across the toolkit.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cdrift {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using BinMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Error classes map onto CLI exit codes: input -> 2, numeric -> 3, schema -> 4.
enum class ErrorKind { input, numeric, schema };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline bool all_finite(const Mat& m) { return m.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
  if (!cond) throw Error(kind, msg);
}

}  // namespace cdrift
