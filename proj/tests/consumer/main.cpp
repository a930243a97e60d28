/*
 * Copyright 2026 The vaeprobe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdio>

#include "vaeprobe/pca.hpp"

int main() {
  const double r = vaeprobe::pca_rate(30, 1.0);
  std::printf("pca_rate(30, 1) = %.6f\n", r);
  return r > 10.39 && r < 10.40 ? 0 : 1;
}
