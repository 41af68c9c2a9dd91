"""Station queueing: closed-form waits, the arrival cap, and a simulation check."""

from hybridcharge.oracle import simulate_md1
from hybridcharge.plan import ScenarioConfig
from hybridcharge.utility import influence_radius, max_arrivals, md1_wait

cfg = ScenarioConfig()

# A station with one charger of each default type.
capacity = sum(c.power_kw for c in cfg.charger_types)
mu = capacity / cfg.ev_battery_kwh
print(f"capacity {capacity:.0f} kW -> service rate {mu:.4f} EV/h")
print(f"influence radius {influence_radius(capacity, cfg):.3f} km")

d_max = max_arrivals(capacity, cfg)
print(f"arrival cap for a {cfg.w_max_minutes:.0f}-minute average wait: {d_max:.4f} EV/h")

# Closed-form mean wait against a million simulated arrivals.
for rho in (0.3, 0.5, 0.7):
    sim = simulate_md1(rho * mu, 1 / mu, 1_000_000, seed=1)
    print(f"rho={rho}: closed form {md1_wait(rho, mu):.4f} h, simulated {sim.mean_wait:.4f} "
          f"+/- {sim.half_width:.4f} h")

# Push twice the cap at the station and let arrivals balk.
sim = simulate_md1(2 * d_max, 1 / mu, 200_000, w_max=cfg.w_max_hours, seed=1)
print(f"at 2x the cap: mean wait {sim.mean_wait:.3f} h, {100 * sim.balked_fraction:.1f}% balked "
      f"(thinning would predict 50%)")
