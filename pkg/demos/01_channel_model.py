"""How much of the transmit swing reaches the floor probe?

The body channel is a capacitive divider: the transmitter's floating ground
couples back to earth through a couple of picofarads, while the floor it
drives is loaded by tens of picofarads. This script compares the quick
divider estimate with the full network and shows how lifting the feet off
the floor shrinks the gain.
"""

from abcsim.circuit import ChannelParams, foot_capacitance, foot_impedance, full_transfer, simplified_gain
from abcsim.circuit import FootGeometry

p = ChannelParams()
print(f"divider estimate      C_G/(C_G+C_CSG+C_L) = {simplified_gain(p):.4f}")
print(f"full network, contact |H(500 kHz)|        = {abs(full_transfer(p)):.4f}")
print()
print(" distance   C_foot     |Z_foot|    |H|")
for d in (0.0, 0.5e-3, 1e-3, 2e-3, 4e-3, 8e-3):
    g = FootGeometry(distance=d)
    c = foot_capacitance(g) if d > 0 else float("nan")
    z = abs(foot_impedance(g, 500e3))
    h = abs(full_transfer(p.with_foot_distance(d)))
    print(f" {d * 1e3:5.1f} mm  {c * 1e12:6.2f} pF  {z / 1e3:8.1f} kΩ  {h:.4f}")

# The divider is the limit of the full model when the series path is negligible.
short = ChannelParams(r_skin=0, r_body=0, r_l=1e12, foot=FootGeometry(contact_resistance=0))
print()
print(f"series path shorted: full {abs(full_transfer(short)):.6f} vs divider {simplified_gain(short):.6f}")
