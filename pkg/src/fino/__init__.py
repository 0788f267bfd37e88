"""
Blind transaction ordering on a DAG-based BFT consensus.

Clients encrypt transactions under fresh keys and entrust the keys to the
validators; transactions are ordered while still encrypted and opened only
after their position is fixed.

Modules, bottom up:

    field, group     prime fields and Schnorr groups
    sss, merkle      secret sharing and Merkle commitments
    tde              threshold decryption with verifiable shares
    commit_reveal    the three dispersal/retrieval engines
    dag, payloads    reliable broadcast DAG and what rides on it
    consensus        views, votes, complaints, ordering and opening
    sim              deterministic simulator, adversaries and monitors
    bench, cli       microbenchmarks and the command line
"""

__version__ = "0.1.0"
