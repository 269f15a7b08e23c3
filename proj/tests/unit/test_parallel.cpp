#include <gtest/gtest.h>

#include <cstdlib>
#include <stdexcept>

#include "gylab/parallel.hpp"

using namespace gylab;

TEST(Parallel, ThreadCountFromEnvironment) {
  setenv("GYLAB_THREADS", "3", 1);
  EXPECT_EQ(thread_count(), 3u);
  setenv("GYLAB_THREADS", "0", 1);
  EXPECT_GE(thread_count(), 1u);
  setenv("GYLAB_THREADS", "junk", 1);
  EXPECT_GE(thread_count(), 1u);
  unsetenv("GYLAB_THREADS");
}

TEST(Parallel, MapIsOrdered) {
  setenv("GYLAB_THREADS", "4", 1);
  const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  unsetenv("GYLAB_THREADS");
}

TEST(Parallel, LowestIndexExceptionWins) {
  setenv("GYLAB_THREADS", "4", 1);
  try {
    parallel_for(50, [](std::size_t i) {
      if (i == 7 || i == 31) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "7");
  }
  unsetenv("GYLAB_THREADS");
}
