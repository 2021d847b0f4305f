"""Radio energy per 15 s cycle for body-channel versus Bluetooth transmission."""

from abcsim.metrics import PowerModel, energy_report
from abcsim.txchain import TdmSchedule, abc_payload_rate

e = energy_report(PowerModel(), TdmSchedule())
print(f"transmit power ratio  {e.ratio} x")
print(f"body channel energy   {float(e.abc_energy_per_cycle) * 1e3:.2f} mJ per cycle")
print(f"Bluetooth energy      {float(e.ble_energy_per_cycle) * 1e3:.1f} mJ per cycle")
print(f"payload rate needed   {abc_payload_rate(2500, TdmSchedule()) / 1e3:.1f} kbps")
