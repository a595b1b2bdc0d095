from __future__ import annotations

import math
from dataclasses import dataclass

FAMILIES = ("db", "sym")
BOUNDARIES = ("periodic", "vmp")
MAX_MOMENTS = 6


@dataclass(frozen=True)
class WaveletSpec:
    """Wavelet family, number of vanishing moments and boundary treatment.

    ``nu == 1`` is the Haar wavelet for either family.  The VMP
    (boundary-corrected) mode needs at least two vanishing moments.
    """

    family: str = "db"
    nu: int = 2
    boundary: str = "vmp"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown wavelet family {self.family!r}")
        if not 1 <= self.nu <= MAX_MOMENTS:
            raise ValueError(f"vanishing moments must be in 1..{MAX_MOMENTS}, got {self.nu}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.boundary == "vmp" and self.nu < 2:
            raise ValueError("boundary-corrected (vmp) wavelets need nu >= 2; use periodic Haar")

    @classmethod
    def parse(cls, name: str, boundary: str = "vmp") -> "WaveletSpec":
        """``WaveletSpec.parse("sym4", "periodic")``; ``"haar"`` means db1."""
        name = name.strip().lower()
        if name == "haar":
            return cls("db", 1, "periodic")
        for fam in FAMILIES:
            if name.startswith(fam) and name[len(fam):].isdigit():
                return cls(fam, int(name[len(fam):]), boundary)
        raise ValueError(f"cannot parse wavelet name {name!r}")

    @property
    def name(self) -> str:
        return f"{self.family}{self.nu}"

    @property
    def filter_length(self) -> int:
        return 2 * self.nu

    @property
    def j0(self) -> int:
        """Coarsest admissible level: at least one interior function fits in [0, 1]."""
        return 0 if self.nu == 1 else math.ceil(math.log2(2 * self.nu))

    def with_boundary(self, boundary: str) -> "WaveletSpec":
        return WaveletSpec(self.family, self.nu, boundary)

    def __str__(self) -> str:
        return f"{self.name}/{self.boundary}"
