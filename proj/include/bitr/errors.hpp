#pragma once

#include <stdexcept>
#include <string>

namespace bitr {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (bad degree, bad ratio, size mismatch).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The two smallest singular values of a matrix handed to the SVD projection
// are not separated, so the projected rotation is not unique.
class DegenerateSpectrum : public Error {
 public:
  DegenerateSpectrum(const std::string& what, double sigma2, double sigma3)
      : Error(what), sigma2_(sigma2), sigma3_(sigma3) {}

  double sigma2() const { return sigma2_; }
  double sigma3() const { return sigma3_; }

 private:
  double sigma2_;
  double sigma3_;
};

// Malformed input file. line() is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace bitr
