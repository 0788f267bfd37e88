"""Walk one transaction through each commit-reveal scheme, then a bad dealing."""

import itertools
import random

from fino import commit_reveal as cr

ctx = cr.CryptoContext.setup(n=4, f=1, seed=0)   # 4 validators, tolerate 1 fault, 2 shares open a tx
rng = random.Random(0)

for scheme in ("threshold", "avidm", "hybrid"):
    bundle = cr.client_disperse(ctx, b"buy 5 ETH", scheme, "alice", rng)
    tx = bundle.tx
    print(f"{scheme:<9} tx {tx.tx_id.hex()[:16]}  envelopes={len(bundle.envelopes)}  payload={len(tx.payload_ct)}B")

    # every validator checks its envelope and acknowledges
    acks = [v for v in range(ctx.n) if cr.on_receive_envelope(ctx, v, tx, bundle.envelopes.get(v)) is cr.Ack.ACK]
    print(f"          acks {acks}, dispersal complete: {cr.disperse_complete(acks, ctx.n, ctx.f)}")

    # after ordering, validators reveal; any F+1 valid shares open the tx
    kind = "tde" if scheme == "threshold" else "sss"
    shares = cr.honest_reveals(ctx, bundle, kind)
    print(f"          one share: {cr.retrieve(ctx, tx, shares[:1])}")
    print(f"          two shares: {cr.retrieve(ctx, tx, shares[2:]).plaintext!r}")

# a dealer hands out shares that do not lie on one polynomial
bundle = cr.client_disperse(ctx, b"sandwich me", "avidm", "mallory", rng, malicious="off_polynomial")
shares = cr.honest_reveals(ctx, bundle, "sss")
outcomes = {cr.retrieve(ctx, bundle.tx, pair) for pair in itertools.combinations(shares, 2)}
print(f"\ninconsistent dealing, {len(outcomes)} distinct outcome(s) over all share pairs: "
      f"{'rejected' if all(o.rejected for o in outcomes) else 'opened'}")
