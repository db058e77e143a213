"""Minimal vectors along diagonal orbits of planar lattices: exact continued
fractions, the cross-section maps, critical radii of planar norms, planted-block
synthesis of Dirichlet non-improvable numbers and dimension lower bounds."""
from .scalars import GOLDEN, SILVER, QuadraticSurd, parse_number, parse_surd
from .contfrac import CFExpansion, cf_digits, convergents, cylinder, remainder_and_z
from .flow import (GroupElement, PlanarLattice, act, lattice_from_alpha, orbit_min_scan,
                   shortest_vector)
from .norms import (EuclideanNorm, OptimizerConfig, PNorm, PolygonNorm, SupNorm,
                    conjugate_norm, conjugating_element, critical_radius, di_test,
                    locus_sample, regular_hexagon)
from .section import (SectionPoint, chain, gauss_S, gauss_T, initial_pair, is_minimal,
                      precompact_test, reconstruct_lattice, section_coords)
from .synthesis import chain_consistency, density, synthesize, verify_limit_point
from .dimension import (asymptotic_bound, audit_family, conditional_band, conditional_tail,
                        dim_lower_bound)

__version__ = "0.1.0"
