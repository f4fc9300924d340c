"""Exact Ford fundamental domains, presentations and homology for the groups
PGL2(O_D) and PSL2(O_D) over imaginary quadratic orders."""

from .arithmetic import (
    ExactPoint,
    FieldElem,
    Ideal,
    Mat2,
    Order,
    QuadInt,
    cusps_equivalent,
    ideal_index,
    make_order,
    norm,
    reduce_mod_lattice,
    units,
)
from .classforms import (
    CuspRep,
    QuadForm,
    class_number,
    cusp_representatives,
    genus_rank,
    reduced_forms,
)
from .geometry import (
    EnvelopeComplex,
    FordDomain,
    GroupMode,
    Hemisphere,
    ResourceCapError,
    enumerate_hemispheres,
    ford_domain,
    height_at,
    stabilizer_infinity,
    swan_check,
    upper_envelope,
)
from .homology import (
    AbelianInvariants,
    IntMatrix,
    abelianization,
    cuspidal_defect,
    parse_presentation,
    smith_normal_form,
    torsion_free_h1,
)
from .poincare import (
    EdgeCycle,
    FacePairing,
    GroupElem,
    Presentation,
    build_presentation,
    cusp_orbits,
    edge_cycles,
    format_presentation,
    matrix_order,
    pair_faces,
    simplify_presentation,
    singular_summary,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
