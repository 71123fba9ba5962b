//! Group element arithmetic, word metrics, and verification procedures for
//! `Z² ⋊_φ Z`, `BS(m,n)`, braid images in SL(2,Z), and confining subsets.

mod bs;
mod matrices;
mod torus_bundle;
mod words;

pub use bs::{
    bass_serre_ball, bs_a_power, bs_normal_form, BSElement, BassSerreBall, BsLetter, CosetWord,
    Syllable,
};
pub use matrices::{
    abelianization, braid_sigma, braid_tau, braid_to_sl2, chirality_search, eigen,
    smith_normal_form_2x2, AnosovData, BraidLetter, ChiralityOutcome, IntMatrix2,
};
pub use torus_bundle::{
    build_claim_set, density_scan, eigen_coords, in_q, minimal_pi_element, phi_apply, tb_conjugate,
    tb_inverse, tb_multiply, verify_confining, words_of_length, ConditionOutcome,
    ConfinementReport, DensityReport, QSide, TorusBundleElement, TorusBundleElementWire,
};
pub use words::{tb_word_ball, word_ball, GeneratorSpec, WordBall};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GroupError {
    #[error("matrix is not Anosov: {0}")]
    NotAnosov(String),
    #[error("word ball exceeded the universe cap of {0} elements")]
    UniverseOverflow(usize),
    #[error("Bass-Serre ball exceeded the cap of {0} vertices")]
    BallOverflow(usize),
    #[error("empty point set")]
    EmptySet,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
