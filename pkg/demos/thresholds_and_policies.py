"""Walk through what an "action" is before any learning happens.

A transmitter only knows its own direct gain, so its strategy is a table:
one power level per direct-gain state, averaging within the power budget.
Each table entry fixes the largest interference the link can take and still
decode, and that threshold is all the learners ever compare.

    python demos/thresholds_and_policies.py
"""
from powergame import enumerate_multirate, enumerate_policies, interference_threshold, snr_to_budget

LEVELS = [0, 5, 10, 15, 20, 25, 30]
GAINS = [0.2, 0.6, 1.0]
PMF = [1 / 3] * 3

print("Interference thresholds at rate 0.75 (negative means never decodable):")
for h in GAINS:
    row = "  ".join(f"{float(interference_threshold(p, h, 0.75)):7.2f}" for p in (5, 15, 30))
    print(f"  h={h:<4} powers 5/15/30 -> {row}")

for snr in (5, 7, 10, 12, 15):
    ps = enumerate_policies(LEVELS, GAINS, PMF, snr_to_budget(snr), 0.75)
    print(f"\n{snr:>2} dB: budget {snr_to_budget(snr):6.2f}, {len(ps):3d} stationary policies")
    if len(ps) <= 4:
        for pol in ps:
            print("      powers per state", pol.powers)

multi = enumerate_multirate([0.75, 0.9, 1.2], LEVELS, GAINS, PMF, snr_to_budget(15))
print(f"\nLetting each user also pick its rate from {{0.75, 0.9, 1.2}} at 15 dB: {len(multi)} actions")
