"""Map loading and validation.

Map files are whitespace-separated token grids, one row per line:
  .   free cell          #   obstacle
  S0  S1  hero spawns    T0  T1  turrets    B0  B1  bases
Marker cells are free cells. The grid must be symmetric under 180-degree
rotation so both sides see a mirrored copy of the same arena, and every free
cell must have at least one free horizontal and one free vertical neighbor
(this is what keeps the per-axis move masks total).
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class GameMap:
    width: int
    height: int
    obstacles: frozenset[tuple[int, int]]
    spawns: tuple[tuple[int, int], tuple[int, int]]
    turrets: tuple[tuple[int, int], tuple[int, int]]
    bases: tuple[tuple[int, int], tuple[int, int]]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def blocked(self, x: int, y: int) -> bool:
        return not self.in_bounds(x, y) or (x, y) in self.obstacles

    def free(self, x: int, y: int) -> bool:
        return not self.blocked(x, y)

    def mirror(self, pos: tuple[int, int]) -> tuple[int, int]:
        return (self.width - 1 - pos[0], self.height - 1 - pos[1])


class MapError(ValueError):
    pass


def _build_default_map() -> str:
    """32x32 arena: a wide single-lane corridor with symmetric obstacle
    islands, bordered by rock. Symmetric under 180-degree rotation."""
    w = h = 32
    rows = [["#"] * w for _ in range(h)]
    # Carve the lane corridor, rows 12..19 inclusive, cols 1..30.
    for y in range(12, 20):
        for x in range(1, 31):
            rows[y][x] = "."
    # Symmetric obstacle islands inside the lane (pairs under 180 rotation),
    # kept off the border rows so no free cell loses both vertical neighbors.
    islands = [(8, 14), (14, 16), (20, 14)]
    for (x, y) in islands:
        rows[y][x] = "#"
        mx, my = w - 1 - x, h - 1 - y
        rows[my][mx] = "#"
    markers = {
        "B0": (2, 15), "B1": (29, 16),
        "T0": (9, 15), "T1": (22, 16),
        "S0": (4, 15), "S1": (27, 16),
    }
    for name, (x, y) in markers.items():
        rows[y][x] = name
    return "\n".join(" ".join(row) for row in rows) + "\n"


DEFAULT_MAP_TEXT = _build_default_map()

_MARKERS = ("S0", "S1", "T0", "T1", "B0", "B1")


def parse_map(text: str) -> GameMap:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MapError("empty map")
    grid = [ln.split() for ln in lines]
    width = len(grid[0])
    for y, row in enumerate(grid):
        if len(row) != width:
            raise MapError(f"row {y} has {len(row)} cells, expected {width}")
    height = len(grid)

    obstacles: set[tuple[int, int]] = set()
    found: dict[str, tuple[int, int]] = {}
    for y, row in enumerate(grid):
        for x, tok in enumerate(row):
            if tok == "#":
                obstacles.add((x, y))
            elif tok == ".":
                pass
            elif tok in _MARKERS:
                if tok in found:
                    raise MapError(f"duplicate marker {tok}")
                found[tok] = (x, y)
            else:
                raise MapError(f"unknown token {tok!r} at ({x},{y})")
    missing = [m for m in _MARKERS if m not in found]
    if missing:
        raise MapError(f"missing markers: {', '.join(missing)}")

    gmap = GameMap(
        width=width,
        height=height,
        obstacles=frozenset(obstacles),
        spawns=(found["S0"], found["S1"]),
        turrets=(found["T0"], found["T1"]),
        bases=(found["B0"], found["B1"]),
    )
    _validate(gmap)
    return gmap


def _validate(gmap: GameMap) -> None:
    for x in range(gmap.width):
        for y in range(gmap.height):
            if gmap.blocked(x, y):
                continue
            if not (gmap.free(x - 1, y) or gmap.free(x + 1, y)):
                raise MapError(f"free cell ({x},{y}) has no free horizontal neighbor")
            if not (gmap.free(x, y - 1) or gmap.free(x, y + 1)):
                raise MapError(f"free cell ({x},{y}) has no free vertical neighbor")
    for name, pos in (("S0", gmap.spawns[0]), ("S1", gmap.spawns[1]),
                      ("T0", gmap.turrets[0]), ("T1", gmap.turrets[1]),
                      ("B0", gmap.bases[0]), ("B1", gmap.bases[1])):
        if gmap.blocked(*pos):
            raise MapError(f"marker {name} on blocked cell {pos}")
    for a, b in ((gmap.spawns, "spawns"), (gmap.turrets, "turrets"), (gmap.bases, "bases")):
        if gmap.mirror(a[0]) != a[1]:
            raise MapError(f"{b} are not mirror images: {a[0]} vs {a[1]}")
    for (x, y) in gmap.obstacles:
        if gmap.in_bounds(x, y) and gmap.mirror((x, y)) not in gmap.obstacles:
            raise MapError(f"obstacle ({x},{y}) breaks 180-degree symmetry")


def load_map(path_or_default: str = "default") -> GameMap:
    """Load a map file, or the built-in arena when given "default"."""
    if path_or_default == "default":
        return parse_map(DEFAULT_MAP_TEXT)
    try:
        with open(path_or_default, "r", encoding="utf-8") as fh:
            return parse_map(fh.read())
    except OSError as exc:
        raise MapError(f"cannot read map {path_or_default!r}: {exc}") from exc
