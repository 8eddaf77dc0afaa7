"""Optimal incoherent Kraus decompositions of qubit channels.

Every incoherent qubit channel admits a Kraus decomposition with at most
four incoherent operators.  This package builds that decomposition
constructively from the channel's Choi matrix, classifies channels by
IO/SIO membership and rank, and samples random incoherent channels to map
out the set of states reachable from a fixed input.
"""

from .errors import (
    ConstraintViolation,
    InvalidChannel,
    NoValidRoot,
    NotIncoherentChannel,
    QubitIOError,
)
from .channel import (
    BlochVector,
    Pattern,
    QubitChannel,
    apply,
    bloch_to_rho,
    channels_equal,
    choi,
    classify_pattern,
    mix_kraus,
    rho_to_bloch,
)
from .canonical import (
    CanonicalIO4,
    CanonicalIO5,
    CanonicalSIO4,
    LegacyIO5,
    legacy_to_five,
    reduce_observation1,
    to_kraus,
)
from .decompose import (
    ChoiEntries,
    DecompositionSolution,
    QuadraticData,
    compute_AB,
    delta_from_canonical,
    decompose_io,
    extract_entries,
    io_membership,
    quadratic_data,
    select_root,
    split_blocks,
)
from .classify import (
    ChannelReport,
    TwoKrausClass,
    classify_two_kraus,
    gallery,
    is_sio_channel,
    report,
    sio_decompose,
)
from .sampler import RegionResult, SamplerConfig, achievable_region, sample_io, sample_io5

__version__ = "0.1.0"
