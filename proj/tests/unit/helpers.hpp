#pragma once

#include "gmsep/common.hpp"

#include <doctest.h>

#include <initializer_list>

namespace testutil {

inline gmsep::Vector vec(std::initializer_list<double> values) {
  gmsep::Vector v(static_cast<gmsep::Index>(values.size()));
  gmsep::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

/// One point per row from a list of 1-D coordinates.
inline gmsep::PointMatrix line(std::initializer_list<double> values) {
  gmsep::PointMatrix m(static_cast<gmsep::Index>(values.size()), 1);
  gmsep::Index i = 0;
  for (double x : values) m(i++, 0) = x;
  return m;
}

template <typename F>
gmsep::ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const gmsep::Error& e) {
    return e.code();
  }
  return gmsep::ErrorCode::kOk;
}

}  // namespace testutil

#define CHECK_CODE(expr, expected) CHECK(testutil::code_of([&] { (void)(expr); }) == (expected))
