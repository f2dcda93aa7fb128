#ifndef HDGNL_COMMON_HPP
#define HDGNL_COMMON_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hdgnl
{

using complex = std::complex<double>;
using index_t = std::int64_t;

inline constexpr complex I{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

// Error categories map one-to-one onto the C API status codes and the CLI exit codes.
enum class ErrorKind
{
  Validation,
  Numerical,
  Io,
  Parse,
  Argument
};

class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string &what)
{
  throw Error(kind, what);
}

struct Vec2
{
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// 2D cross product a x b (the z component).
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

}  // namespace hdgnl

#endif  // HDGNL_COMMON_HPP
