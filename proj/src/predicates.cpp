#include "predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>

namespace nozzle::geometry::detail {

namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEps = std::numeric_limits<double>::epsilon() * 0.5;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

template <class T> int sign(const T &x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

int orient_exact(Point a, Point b, Point c) {
  const Rational ax(a.r), ay(a.z), bx(b.r), by(b.z), cx(c.r), cy(c.z);
  return sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax));
}

int incircle_exact(Point a, Point b, Point c, Point d) {
  const Rational dx(d.r), dy(d.z);
  const Rational adx = Rational(a.r) - dx, ady = Rational(a.z) - dy;
  const Rational bdx = Rational(b.r) - dx, bdy = Rational(b.z) - dy;
  const Rational cdx = Rational(c.r) - dx, cdy = Rational(c.z) - dy;
  const Rational alift = adx * adx + ady * ady;
  const Rational blift = bdx * bdx + bdy * bdy;
  const Rational clift = cdx * cdx + cdy * cdy;
  const Rational det = alift * (bdx * cdy - cdx * bdy) +
                       blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
  return sign(det);
}

} // namespace

int orient2d(Point a, Point b, Point c) {
  const double left = (b.r - a.r) * (c.z - a.z);
  const double right = (b.z - a.z) * (c.r - a.r);
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return orient_exact(a, b, c);
}

int incircle(Point a, Point b, Point c, Point d) {
  const double adx = a.r - d.r, ady = a.z - d.z;
  const double bdx = b.r - d.r, bdy = b.z - d.z;
  const double cdx = c.r - d.r, cdy = c.z - d.z;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) +
                     clift * (adxbdy - bdxady);
  const double permanent =
      (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
      (std::abs(cdxady) + std::abs(adxcdy)) * blift +
      (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = kInCircleBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return incircle_exact(a, b, c, d);
}

} // namespace nozzle::geometry::detail
