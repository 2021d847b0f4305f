"""The receiver's front end: bandpass design and envelope detection.

The bandpass is a Kaiser-window FIR sized for 80 dB stopband attenuation.
The envelope is the full-wave rectified filter output averaged over two
carrier cycles, and the slicer thresholds it once per bit.
"""

import numpy as np

from abcsim.rxchain import FilterSpec, bandpass, design_bandpass, envelope, threshold_and_slice, verify_filter
from abcsim.txchain import ModemParams, ook_modulate

fs = 3.9e6
taps = design_bandpass(FilterSpec(), fs)
check = verify_filter(taps, FilterSpec(), fs, n_probe=16)
print(f"{len(taps)} taps, meets spec: {check.ok}")
for f, r in zip(check.freqs, check.response_db):
    print(f"  {f / 1e3:7.0f} kHz  {r:8.2f} dB")

bits = np.array([0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 0])
env = envelope(bandpass(ook_modulate(bits, ModemParams()), taps))
sliced = threshold_and_slice(env)
# the bit clock starts at the first rising edge and stops when the capture ends
n = len(sliced.bits)
print("sent   ", "".join(map(str, bits[2:2 + n])))
print("sliced ", "".join(map(str, sliced.bits)))
