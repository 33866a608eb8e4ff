#pragma once

#include <functional>

#include <gtest/gtest.h>

#include "gflm/error.hpp"

// Kind of the gflm::Error thrown by f; a test failure if nothing is thrown.
inline gflm::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const gflm::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no gflm::Error thrown";
  return gflm::ErrorKind::kNumeric;
}
