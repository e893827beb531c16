"""Polynomial-ring arithmetic: modular words, RNS, NTT and BGV multiplication."""

from .bgv import (
    LevelModulus,
    bgv_multiply,
    bgv_multiply_reference,
    intt_product,
    ntt_ciphertext,
    pipeline_multiply,
)
from .modarith import (
    ResidueModulus,
    WideProduct,
    barrett_reduce,
    find_ntt_prime,
    find_primitive_2n_root,
    iter_ntt_primes,
    mod_add,
    mod_inverse,
    mod_mul,
    mod_mul32,
    mod_neg,
    mod_pow,
    mod_sub,
    wide_mul_32x32,
)
from .ntt import (
    NttPlan,
    Threading,
    TwiddleOrder,
    TwiddleTable,
    bit_reverse,
    build_base_twiddles,
    build_twiddles,
    inverse_twiddle_reads,
    ntt_forward,
    ntt_forward_array,
    ntt_forward_poly,
    ntt_inverse,
    ntt_inverse_array,
    ntt_inverse_poly,
)
from .polyring import (
    BgvProduct,
    Ciphertext,
    Domain,
    Layout,
    RnsPolynomial,
    SubPolynomial,
    convert_layout,
    from_layout,
    negacyclic_mul_exact,
    negate,
    pointwise_add,
    pointwise_mul,
    pointwise_sub,
    schoolbook_negacyclic_mul,
)
from .rns import (
    RnsBase,
    base_from_config,
    base_to_config,
    build_base,
    decompose,
    default_coefficient_bits,
    load_base_config,
    reconstruct,
)

__all__ = [
    # Modular arithmetic
    "ResidueModulus",
    "WideProduct",
    "wide_mul_32x32",
    "mod_mul32",
    "barrett_reduce",
    "mod_add",
    "mod_sub",
    "mod_neg",
    "mod_mul",
    "mod_pow",
    "mod_inverse",
    "find_ntt_prime",
    "iter_ntt_primes",
    "find_primitive_2n_root",
    # RNS
    "RnsBase",
    "build_base",
    "decompose",
    "reconstruct",
    "default_coefficient_bits",
    "base_to_config",
    "base_from_config",
    "load_base_config",
    # Polynomials
    "Domain",
    "Layout",
    "SubPolynomial",
    "RnsPolynomial",
    "Ciphertext",
    "BgvProduct",
    "pointwise_add",
    "pointwise_sub",
    "pointwise_mul",
    "negate",
    "schoolbook_negacyclic_mul",
    "negacyclic_mul_exact",
    "convert_layout",
    "from_layout",
    # NTT
    "NttPlan",
    "Threading",
    "TwiddleOrder",
    "TwiddleTable",
    "bit_reverse",
    "build_twiddles",
    "build_base_twiddles",
    "inverse_twiddle_reads",
    "ntt_forward",
    "ntt_inverse",
    "ntt_forward_array",
    "ntt_inverse_array",
    "ntt_forward_poly",
    "ntt_inverse_poly",
    # BGV
    "LevelModulus",
    "bgv_multiply",
    "bgv_multiply_reference",
    "ntt_ciphertext",
    "intt_product",
    "pipeline_multiply",
]
