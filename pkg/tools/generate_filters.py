"""Regenerate the shipped filter files in ``src/fastcob/data``.

PyWavelets supplies reference taps so that our spectral factorisations pick
the same phase (symlets are not unique otherwise).  It is only needed here,
not at runtime.

    python3 tools/generate_filters.py
"""
from pathlib import Path

import numpy as np
import pywt

from fastcob.wavelets.design import build_filter_set
from fastcob.wavelets.filters import write_filter_file
from fastcob.wavelets.spec import FAMILIES, MAX_MOMENTS, WaveletSpec

OUT = Path(__file__).resolve().parents[1] / "src" / "fastcob" / "data"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for family in FAMILIES:
        for nu in range(1, MAX_MOMENTS + 1):
            spec = WaveletSpec(family, nu, "periodic")
            target = np.array(pywt.Wavelet("haar" if nu == 1 else spec.name).rec_lo)
            arrays = build_filter_set(spec, target)
            path = OUT / f"{spec.name}.cwwf"
            write_filter_file(path, spec, arrays)
            print(f"{path.name}: {', '.join(f'{k}{v.shape}' for k, v in arrays.items())}")


if __name__ == "__main__":
    main()
