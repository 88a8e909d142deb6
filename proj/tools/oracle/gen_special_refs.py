#!/usr/bin/env python3
# Copyright 2026 The dpn-toolkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates src/oracle/special_refs.inc with 50-digit mpmath values.

Grid abscissae are emitted as hex-float literals so C++ sees the exact
doubles that were evaluated.
"""
import mpmath

mpmath.mp.dps = 50


def row(x):
    m = mpmath.mpf(x)
    return "    {%s, %s, %s}," % (
        x.hex(),
        mpmath.nstr(mpmath.digamma(m), 25, min_fixed=-1, max_fixed=1),
        mpmath.nstr(mpmath.loggamma(m), 25, min_fixed=-1, max_fixed=1),
    )


def main():
    grid = [float(mpmath.mpf(10) ** (mpmath.mpf(-3) + mpmath.mpf(9) * i / 199)) for i in range(200)]
    lines = ["// Generated by tools/oracle/gen_special_refs.py; do not edit.",
             "// {x, digamma(x), log_gamma(x)} on a log grid over [1e-3, 1e6].",
             "inline constexpr SpecialRef kSpecialGrid[] = {"]
    lines += [row(x) for x in grid]
    lines.append("};")
    lines.append("")
    lines.append("// Spot values.")
    lines.append("inline constexpr SpecialRef kDigamma10_5 = %s;" % row(10.5).strip().rstrip(","))
    lines.append("inline constexpr SpecialRef kLogGamma123_4 = %s;" % row(123.4).strip().rstrip(","))
    print("\n".join(lines))


if __name__ == "__main__":
    main()
