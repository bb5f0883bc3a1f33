// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include "kgspec/lapack.hpp"

int main(int argc, char **argv)
{
  kgspec::ensure_sound_blas(argv);
  ::testing::InitGoogleTest(&argc, argv);
  return RUN_ALL_TESTS();
}
