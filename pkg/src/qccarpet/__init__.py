"""Periodic quasiconformal extensions and rigidity checks for square and C*-square carpets."""
from .carpet import Carpet, CarpetError, carpet_area, cstar_carpet, peripheral_circles, ring_carpet, sierpinski, \
    symmetric_carpet
from .geometry import ClosedCurve, GeometryError, PointC, RectChart, Region
from .maps import CarpetMap, CircleMap, GridMap, MapError, PlaneMap, conjugated_rotation, is_periodic, \
    rotation_map
from .modulus import Density, HolePairing, ModulusError, ModulusResult, PathFamily, modulus, path_family, \
    rigidity_bound_check
from .rigidity import HypothesisError, IntervalMap, RigidityError, RigidityReport, carpet_rigidity_pipeline, \
    circle_periodicity_witness, cstar_pipeline, interval_periodicity_witness, square_carpet_pipeline

__version__ = "0.1.0"
