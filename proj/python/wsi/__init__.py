"""Write-snapshot isolation: transactional engine, commit oracle, history
checking and workload drivers."""

from ._wsi import (
    CapacityError,
    CommitError,
    Engine,
    Error,
    ParseError,
    PreconditionError,
    RecoveryError,
    StateError,
    Transaction,
    WalError,
    bench_oracle,
    check,
    construct_serial,
    is_serializable,
    recover,
    replay,
    run_workload,
)

__all__ = [
    "CapacityError",
    "CommitError",
    "Engine",
    "Error",
    "ParseError",
    "PreconditionError",
    "RecoveryError",
    "StateError",
    "Transaction",
    "WalError",
    "bench_oracle",
    "check",
    "construct_serial",
    "is_serializable",
    "recover",
    "replay",
    "run_workload",
]
