"""A crashed leader, complaints, and the next leader picking up where it left off."""

from fino.sim import Adversary, Config, Simulation

sim = Simulation(Config(n=4, f=1, tx_load=6, seed=2, scheme="hybrid"), Adversary("crash_leader", views=(1,)))
report = sim.run()

print(report.to_table())
print()
for v in sim.validators:
    if not v.honest:
        print(f"validator {v.vid}: crashed")
        continue
    # view 1 never gets votes; view 2 is justified by 2F+1 complaints on view 1
    complainers = sorted(v.complaints.get(1, {}))
    print(f"validator {v.vid}: ordered views {v.ordered_views}, complaints seen on view 1 from {complainers}")

sequences = {tuple(v.committed) for v in sim.validators if v.honest}
print(f"\nhonest validators agree on the order: {len(sequences) == 1}")
