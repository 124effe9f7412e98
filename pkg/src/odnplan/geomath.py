"""Great-circle helpers shared by the model, planner, and geodata layers.

Coordinates are (longitude, latitude) pairs in WGS84 degrees, matching
GeoJSON ordering.
"""

from __future__ import annotations

import math
from typing import Sequence

Coordinate = tuple[float, float]

# IUGG mean earth radius.
EARTH_RADIUS_KM = 6371.0088


def haversine_km(a: Coordinate, b: Coordinate) -> float:
    """Great-circle distance in km between two lon/lat points."""
    lon1, lat1 = math.radians(a[0]), math.radians(a[1])
    lon2, lat2 = math.radians(b[0]), math.radians(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2.0) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def polyline_length_km(points: Sequence[Coordinate]) -> float:
    """Sum of haversine segment lengths along a polyline."""
    total = 0.0
    for prev, cur in zip(points, points[1:]):
        total += haversine_km(prev, cur)
    return total
