"""Reader field parameters: 13.56 MHz carrier, 9..40 cm range per reader,
and a per-cycle inventory capacity that varies among readers."""

from dataclasses import dataclass

CARRIER_MHZ = 13.56
RANGE_MIN_CM = 9
RANGE_MAX_CM = 40


@dataclass(frozen=True)
class ReaderFieldModel:
    range_cm: int = RANGE_MAX_CM
    capacity: int = 4
    carrier_mhz: float = CARRIER_MHZ

    def __post_init__(self):
        if not RANGE_MIN_CM <= self.range_cm <= RANGE_MAX_CM:
            raise ValueError(
                f"reader range must be {RANGE_MIN_CM}..{RANGE_MAX_CM} cm, got {self.range_cm}"
            )
        if self.capacity < 1:
            raise ValueError("inventory capacity must be at least 1")
