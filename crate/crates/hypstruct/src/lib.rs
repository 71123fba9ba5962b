//! Hyperbolic-plane group actions, projection complexes and quasi-trees of
//! metric spaces, quasimorphisms, and desk-scale posets of hyperbolic
//! structures for Anosov torus-bundle groups.
//!
//! The crate is organized around the pipeline:
//!
//! - [`hyp2`] — upper half-plane geometry: points, geodesics, isometries,
//!   classification, and closest-point projections.
//! - [`groups`] — element arithmetic and verification for `Z² ⋊_φ Z`,
//!   `BS(m,n)`, braid images in SL(2,Z), confining subsets, and word metrics.
//! - [`actions`] — concrete actions on model spaces, orbit-growth
//!   classification, main-lemma certificates, and quasi-isometry estimates.
//! - [`quasimorphisms`] — defect estimation, homogenization, Busemann
//!   quasimorphisms, and induction from finite-index subgroups.
//! - [`projection_complex`] — projection axioms (P0)-(P2), modified
//!   distances, the projection graph `P_K`, the quasi-tree of metric spaces
//!   `C_K`, and the bottleneck criterion.
//! - [`geodesic_families`] — synthetic flip-manifold geometry: disjoint
//!   geodesic configurations, boundary projections, flip trees, and export
//!   to domain families.
//! - [`poset`] — assembly and certification of the Anosov torus-bundle poset
//!   of hyperbolic structures.
//! - [`cli`] — configuration and report plumbing for the `hypstruct` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod actions;
pub mod cli;
pub mod geodesic_families;
pub mod groups;
pub mod hyp2;
pub mod poset;
pub mod projection_complex;
pub mod quasimorphisms;
