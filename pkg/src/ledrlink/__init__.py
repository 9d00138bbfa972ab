"""Discrete-event simulator and protocol library for a clock-less
bit-serial LVDS address-event link: level-encoded dual-rail signaling,
token-ring serialization, instant on/off common-mode wake, burst-mode
word acknowledges, and event-rate power accounting.
"""

from .kernel import Jitter, Kernel, RunStats, SchedulingInPastError, Signal, SimEvent
from .ledr import (
    EventWord,
    Phase,
    ProtocolViolation,
    RailSymbol,
    decode_stream,
    encode_word,
    relation_of,
)
from .link import (
    ConfigError,
    Link,
    LinkConfig,
    LinkStats,
    StallDiagnosis,
    default_config,
    run_loopback,
)
from .phy import CM_GND, CM_VREF, LvdsPair, PhyConfig, PhyLink
from .power import (
    RX,
    TX,
    DEFAULT_PEAK_RATE_EPS,
    PowerParams,
    PowerSummary,
    RateError,
    TraceEnergy,
    current_at_rate,
    energy_of_trace,
    summary_ratios,
)
from .rxring import ReceivedWord, RxTokenCell, RxTokenRing
from .sources import BurstSource, EventSource, PeriodicSource, PoissonSource, SaturatingSource
from .txring import (
    MutualExclusionError,
    RingBusyError,
    TxTokenCell,
    TxTokenRing,
    ValidityReport,
    validity_check,
    word_to_dual_rail,
)
from .vcd import write_vcd

__version__ = "0.1.0"
