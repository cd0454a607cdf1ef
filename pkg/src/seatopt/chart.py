"""SVG seating charts.

Round tables are drawn as circles inside their seat ring, rows as a line
through their seats.  Each seat is a dot labelled with the guests sitting
there; a seat holding more than one guest lists them stacked and gets an
``overlap`` ring.
"""
from __future__ import annotations

from typing import Mapping, Optional
from xml.sax.saxutils import escape, quoteattr

from .geometry import Round, SeatingProblem

SCALE = 80.0        # pixels per layout unit
MARGIN = 1.2        # layout units around the seats
LINE_HEIGHT = 13.0  # pixels between stacked labels

STYLE = """
.table{fill:#f3efe6;stroke:#8a7a5c;stroke-width:2}
.row{stroke:#8a7a5c;stroke-width:6;stroke-linecap:round}
.seat{fill:#ffffff;stroke:#333333;stroke-width:1.5}
.seat.taken{fill:#9cc3e6}
.overlap{fill:none;stroke:#d62728;stroke-width:3}
.label{font-family:sans-serif;font-size:11px;text-anchor:middle}
.table-id{font-family:sans-serif;font-size:12px;font-style:italic;text-anchor:middle;fill:#6b5d45}
"""


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def render_chart(problem: SeatingProblem, seating: Optional[Mapping[str, int]] = None) -> str:
    """SVG 1.1 text for ``problem`` with guests placed per ``seating`` (guest id -> global seat).

    With ``seating=None`` only the tables and empty seats are drawn.
    """
    seating = seating or {}
    for g, s in seating.items():
        if not 0 <= s < len(problem.seats):
            raise ValueError(f"guest {g!r} placed on nonexistent seat {s}")
    at: dict[int, list[str]] = {}
    for g in sorted(seating):
        at.setdefault(seating[g], []).append(g)

    xs = [s.position[0] for s in problem.seats]
    ys = [s.position[1] for s in problem.seats]
    x0, x1 = min(xs) - MARGIN, max(xs) + MARGIN
    y0, y1 = min(ys) - MARGIN, max(ys) + MARGIN
    width, height = (x1 - x0) * SCALE, (y1 - y0) * SCALE

    def px(x, y):
        # layout y points up, SVG y points down
        return (x - x0) * SCALE, (y1 - y) * SCALE

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_f(width)}" height="{_f(height)}" viewBox="0 0 {_f(width)} {_f(height)}">',
        f"<style type=\"text/css\">{STYLE}</style>",
        '<g id="tables">',
    ]
    for t in problem.tables:
        lay = t.layout
        seats = [s for s in problem.seats if s.table_id == t.id]
        if isinstance(lay, Round):
            cx, cy = px(*lay.center)
            out.append(f'<circle class="table" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(0.6 * lay.radius * SCALE)}"/>')
            lx, ly = cx, cy + 4
        else:
            ax, ay = px(*seats[0].position)
            bx, by = px(*seats[-1].position)
            out.append(f'<line class="row" x1="{_f(ax)}" y1="{_f(ay)}" x2="{_f(bx)}" y2="{_f(by)}"/>')
            lx, ly = (ax + bx) / 2, (ay + by) / 2 - 10
        out.append(f'<text class="table-id" x="{_f(lx)}" y="{_f(ly)}">{escape(t.id)}</text>')
    out.append("</g>")

    out.append('<g id="seats">')
    for s in problem.seats:
        x, y = px(*s.position)
        names = at.get(s.global_index, [])
        cls = "seat taken" if names else "seat"
        sid = quoteattr(f"{s.table_id}:{s.index_in_table}")
        out.append(f'<g class="seat-group" data-seat={sid}>')
        out.append(f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" r="9"/>')
        if len(names) > 1:
            out.append(f'<circle class="overlap" cx="{_f(x)}" cy="{_f(y)}" r="14">'
                       f"<title>{len(names)} guests on one seat</title></circle>")
        for k, g in enumerate(names):
            out.append(f'<text class="label" x="{_f(x)}" y="{_f(y + 24 + k * LINE_HEIGHT)}">{escape(g)}</text>')
        out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def overlap_flag_count(svg: str) -> int:
    return svg.count('class="overlap"')
