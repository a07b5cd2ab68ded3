#!/usr/bin/env python3
"""Brute-force reference for the noiseless synthetic MOS over the full condition matrix.

Independent of the C++ code path: enumerates every influence-factor combination with
itertools and evaluates the multiplicative degradation model directly. The printed
values are frozen in tests/synth_test.cpp.
"""
import itertools
import math

OVERALL_KBPS = {("HD720", "LQ"): 1389, ("HD720", "MQ"): 3461, ("HD720", "HQ"): 8040,
                ("HD1080", "LQ"): 2871, ("HD1080", "MQ"): 7457, ("HD1080", "HQ"): 13100}
PIXELS = {"HD1080": 1920 * 1080, "HD720": 1280 * 720}
AUDIO_KBPS, FPS = 128, 25
PLR_W, JITTER_W, BW_W, CODEC_W, REF_BPP = 0.9, 0.0035, 0.15, 3.6, 0.01


def mos(res, rate, bw, plr, jitter):
    bpp = (OVERALL_KBPS[(res, rate)] - AUDIO_KBPS) * 1000 / (PIXELS[res] * FPS)
    q = math.exp(-CODEC_W * REF_BPP / bpp)
    q *= math.exp(-PLR_W * plr)
    q *= math.exp(-JITTER_W * jitter)
    q *= math.exp(-BW_W) if bw == "Low" else 1.0
    return 1 + 4 * q


cells = list(itertools.product(["HD1080", "HD720"], ["HQ", "MQ", "LQ"], ["High", "Low"],
                               [0, 0.1, 0.5], [0, 10, 50, 100]))
values = [mos(*c) for c in cells]
print(f"count={len(values)}")
print(f"mean={sum(values) / len(values):.12f}")
print(f"min={min(values):.12f} at {cells[values.index(min(values))]}")
print(f"max={max(values):.12f} at {cells[values.index(max(values))]}")
print(f"HD1080_HQ_High_p0_j0={mos('HD1080', 'HQ', 'High', 0, 0):.12f}")
print(f"HD720_LQ_Low_p0.5_j100={mos('HD720', 'LQ', 'Low', 0.5, 100):.12f}")
