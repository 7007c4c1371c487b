"""Independent reference values for the device tests.

Brute-force evaluation of the write pulses on a dense grid (numpy), no code
shared with the C++ implementation. Prints the values frozen in
tests/unit/test_device.cpp.
"""
import math

import numpy as np

AP, AN = 1.0, -1.0
TP, TN = 1e-3, 100.0
TAUP, TAUN = 0.5e-3, 50.0
VTH = 1.01


def pulse(t, normalized):
    t = np.asarray(t, dtype=float)
    v = np.zeros_like(t)
    ramp = (t >= -TP) & (t < 0)
    fl = math.exp(-TP / TAUP)
    v[ramp] = AP * (np.exp(t[ramp] / TAUP) - fl) / (1 - fl)
    tail = (t > 0) & (t <= TN)
    if normalized:
        fn = math.exp(-TN / TAUN)
        v[tail] = AN * (np.exp(-t[tail] / TAUN) - fn) / (1 - fn)
    else:
        v[tail] = AN * np.exp(-t[tail] / TAUN)
    return v


def net_extremes(dt, normalized):
    # dense grid around both ramps plus the whole support
    ts = [np.linspace(-TP, TN + abs(dt) + TP, 400001)]
    for s in (0.0, dt):
        ts.append(np.linspace(s - TP, s - 1e-12, 200001))
    t = np.concatenate(ts)
    v = pulse(t, normalized) - pulse(t - dt, normalized)
    return v.max(), v.min()


def overdrive_neg(dt, normalized):
    return max(0.0, -net_extremes(dt, normalized)[1] - VTH)


if __name__ == "__main__":
    for norm in (False, True):
        name = "normalized" if norm else "exponential"
        print(name, "min net at dt=50:", repr(net_extremes(50.0, norm)[1]))
        print(name, "max net at dt=-50:", repr(net_extremes(-50.0, norm)[0]))
    peak = max(overdrive_neg(d, False) for d in np.geomspace(1e-5, 1.0, 200))
    print("peak overdrive (exponential):", repr(peak))
    # noise-free window: log-linear fit of od(dt) on [5, 100] ms
    dts = np.linspace(5, 100, 96)
    od = np.array([overdrive_neg(d, False) for d in dts])
    slope = np.polyfit(dts, np.log(od), 1)[0]
    print("fitted tau (exponential, 1 ms grid):", repr(-1.0 / slope))
    print("dG(50, g=0) at lr=0.5:", repr(0.5 / peak * overdrive_neg(50.0, False)))
