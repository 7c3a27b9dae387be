"""Benchmark root sets and energies for the L = 2 and L = 3 chains.

Rows are stored as printed (4-decimal roots, 6-decimal energies) in the
column layout ``u_1 .. u_Lmax | nu_1 .. nu_Lmax | E | n`` with ``-`` for an
absent root.  Couplings are those of :func:`susytj.kernels.table_params`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .tq import BetheRootSet


@dataclass(frozen=True)
class ReferenceRow:
    n: int
    roots: BetheRootSet
    energy: float

    @property
    def M(self) -> int:
        return self.roots.M


_L2_ROWS = (
    "-0.1000 - 1.6602i | 0.1004 - 0.0000i | 0.1264 + 3.3108i | 0.1264 - 3.3108i | -5.312156 | 1",
    "-0.1000 - 0.2048i | 0.1004 + 0.0000i | 0.8095 - 3.4060i | 0.8095 + 3.4060i | -4.555656 | 2",
    "0.1005 + 0.0000i | - | 0.0000 - 3.3070i | - | -3.325040 | 3",
    "-0.1000 - 1.6539i | -0.1000 - 0.2053i | 0.0255 + 3.3085i | 0.0255 - 3.3085i | -3.218186 | 4",
    "-0.1000 - 3.7095i | -0.1000 - 0.1000i | 0.0000 - 4.6812i | 0.1496 - 0.0000i | -1.996355 | 5",
    "-0.1000 - 2.3555i | - | 0.0000 - 3.7060i | - | -1.992804 | 6",
    "-0.1000 + 0.2040i | - | -0.0000 + 3.3148i | - | -1.225154 | 7",
    "- | - | - | - | 0 | 8",
    "-0.1000 - 0.0999i | - | -0.1496 - 0.0000i | - | 0.001822 | 9",
)

_L3_ROWS = (
    "0.1183 - 0.0000i | 0.8870 + 0.0000i | 0.4749 - 0.0000i | -0.0000 + 2.1850i | 1.5149 - 4.0404i | 1.5149 + 4.0404i | -7.229050 | 1",
    "0.1073 - 0.0000i | -0.1000 - 0.1218i | -0.1000 + 2.3587i | 0.0000 - 0.1091i | 0.9332 - 4.1573i | 0.9332 + 4.1573i | -5.595946 | 2",
    "0.1183 - 0.0000i | 0.4290 - 0.0000i | - | 0.8379 - 3.4029i | 0.8379 + 3.4029i | - | -5.210221 | 3",
    "1.4165 - 0.0000i | -0.3183 - 0.0000i | - | 0.9773 - 3.3657i | 0.9773 + 3.3657i | - | -5.079400 | 4",
    "0.1182 - 0.0000i | 0.4997 - 0.0000i | -0.1000 - 0.0701i | -0.0000 + 1.9912i | 1.4407 - 4.0634i | 1.4407 + 4.0634i | -4.495822 | 5",
    "-0.1000 + 0.0701i | 0.1183 + 0.0000i | 0.8474 + 0.0000i | 0.0000 - 2.1041i | 1.4824 - 4.0500i | 1.4824 + 4.0500i | -4.426045 | 6",
    "0.0005 - 0.0704i | 0.0005 + 0.0704i | -0.1000 + 2.3565i | -0.0000 + 0.0684i | 0.9328 - 4.1576i | 0.9328 + 4.1576i | -4.253561 | 7",
    "1.4210 + 0.0000i | 0.4273 + 0.0000i | - | 0.9950 - 3.3623i | 0.9950 + 3.3623i | - | -4.166597 | 8",
    "-0.1000 - 0.1216i | 0.1073 + 0.0000i | - | 0.0000 - 3.8739i | 0.0000 - 0.1092i | - | -3.598898 | 9",
    "-0.1000 + 0.0701i | 0.8813 - 0.0000i | 0.4760 + 0.0000i | 1.5100 - 4.0418i | 1.5100 + 4.0418i | 0.0000 + 2.1735i | -3.484233 | 10",
    "0.1183 + 0.0000i | - | - | 0.0000 + 3.3063i | - | - | -3.061679 | 11",
    "-0.1000 - 0.1733i | -0.1000 - 2.8910i | - | -0.0000 + 4.5408i | -0.0000 - 0.0711i | - | -2.996075 | 12",
    "-0.1000 - 0.0601i | -0.1000 + 2.3432i | -0.1000 - 0.3120i | 0.9298 - 4.1596i | 0.9298 + 4.1596i | 0.1995 - 0.0000i | -2.682705 | 13",
    "-0.1000 + 0.0700i | 0.1183 + 0.0000i | - | 0.8135 - 3.4056i | 0.8135 + 3.4056i | - | -2.378366 | 14",
    "0.0004 - 0.0699i | 0.0004 + 0.0699i | - | 0.0000 - 3.8760i | 0.0000 - 0.0680i | - | -2.256786 | 15",
    "0.4178 - 0.0000i | - | - | 0.0000 - 3.2852i | - | - | -2.154975 | 16",
    "1.7975 - 0.0000i | - | - | 0.0000 - 2.9281i | - | - | -2.011140 | 17",
    "-0.1000 - 0.0577i | -0.1000 + 0.1731i | -0.1000 + 4.5434i | 0.1682 - 0.0768i | 0.1682 + 0.0768i | 0.0000 - 5.7342i | -1.997344 | 18",
    "-0.1000 - 0.0700i | -0.6290 + 0.0000i | - | 0.8334 + 3.4033i | 0.8334 - 3.4033i | - | -1.464602 | 19",
    "-0.1000 + 0.0700i | 1.4155 + 0.0000i | - | 0.9731 - 3.3664i | 0.9731 + 3.3664i | - | -1.333802 | 20",
    "-0.1000 + 0.1730i | - | - | 0.0000 + 0.0709i | - | - | -0.998177 | 21",
    "-0.1000 - 0.0577i | -0.1000 + 2.8833i | - | 0.1777 + 0.0000i | -0.0000 - 4.5376i | - | -0.995481 | 22",
    "-0.1000 - 0.0601i | -0.1000 + 0.3107i | - | -0.0000 - 3.8889i | -0.1993 - 0.0000i | - | -0.686247 | 23",
    "- | - | - | - | - | - | 0 | 24",
    "-0.1000 + 0.1731i | -0.1000 - 0.0577i | - | 0.1682 - 0.0768i | 0.1682 + 0.0768i | - | 0.001770 | 25",
    "-0.1000 + 0.0700i | - | - | 0.0000 + 3.3113i | - | - | 0.684187 | 26",
    "-0.1000 - 0.0577i | - | - | 0.1776 + 0.0000i | - | - | 1.000607 | 27",
)


def _parse_complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


def _parse(rows: tuple[str, ...], width: int) -> tuple[ReferenceRow, ...]:
    out = []
    for line in rows:
        cells = [c.strip() for c in line.split("|")]
        u = [_parse_complex(c) for c in cells[:width] if c != "-"]
        nu = [_parse_complex(c) for c in cells[width:2 * width] if c != "-"]
        out.append(ReferenceRow(int(cells[-1]), BetheRootSet(u, nu), float(cells[-2])))
    return tuple(out)


REFERENCE_L2 = _parse(_L2_ROWS, 2)
REFERENCE_L3 = _parse(_L3_ROWS, 3)


def reference_rows(L: int) -> tuple[ReferenceRow, ...]:
    """Printed rows for chain length L (2 or 3); empty for other lengths."""
    return {2: REFERENCE_L2, 3: REFERENCE_L3}.get(L, ())
