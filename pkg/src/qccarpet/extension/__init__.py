"""Quasiconformal extensions: Beurling-Ahlfors, periodic annulus maps, reflection towers, hole surgery."""
from .annulus import (AnnulusDecomposition, GlueMaps, build_glue_maps, cell_dilatations, decompose_annulus,
                      dilatation_spread, periodic_annulus_extension, radial_extension)
from .beurling_ahlfors import LiftIntegral, ba_extend
from .surgery import (OrbitDecomposition, SurgeryError, carpet_periodic_extension, conjugated_carpet_rotation,
                      hole_orbits, initial_extension, match_holes)
from .tower import ReflectionTower, TowerError, default_depth, extend_to_plane, reflect, reflection_tower_extend

__all__ = [
    "AnnulusDecomposition", "GlueMaps", "LiftIntegral", "OrbitDecomposition", "ReflectionTower",
    "SurgeryError", "TowerError", "ba_extend", "build_glue_maps", "carpet_periodic_extension",
    "cell_dilatations", "conjugated_carpet_rotation", "decompose_annulus", "default_depth",
    "dilatation_spread", "extend_to_plane", "hole_orbits", "initial_extension", "match_holes",
    "periodic_annulus_extension", "radial_extension", "reflect", "reflection_tower_extend",
]
