//! Command-line front end: configuration parsing, verification suites, and
//! report emission for the `hypstruct` binary.
//!
//! Reports are emitted as JSON lines (one object per check) or as a human
//! text summary; identical configuration and seed produce byte-identical
//! output. Exit codes: 0 all checks pass, 1 violations found, 2
//! configuration error.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::actions::{
    anosov_action, check_main_lemma, classify_orbit_growth, cyclic_action, lineal_from_hom,
    qi_estimate, AnosovSide, BsGroup, Group, TorusBundleGroup, Z2Group, ZGroup,
};
use crate::geodesic_families::{
    bounded_projection_scan, family_from_config, family_from_tree, random_disjoint_geodesics,
    schottky_flip_tree, Color, ThetaConstants,
};
use crate::groups::{
    bs_a_power, build_claim_set, density_scan, eigen, eigen_coords, minimal_pi_element,
    tb_word_ball, verify_confining, words_of_length, BSElement, GeneratorSpec, IntMatrix2, QSide,
    TorusBundleElement,
};
use crate::hyp2::{self, Isometry};
use crate::poset::{anosov_poset, emit_dot};
use crate::projection_complex::{
    bottleneck_check, build_projection_graph, build_quasi_tree, verify_axioms,
};
use crate::quasimorphisms::{busemann_qm, defect_estimate, homogenize, QMap};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Dot,
}

/// Top-level configuration of a run.
#[derive(Debug, Parser)]
#[command(
    name = "hypstruct",
    about = "Verification suites for hyperbolic actions, confining subsets, projection complexes, and structure posets"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format (dot is available for poset/complex/flip).
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: OutputFormat,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify an isometry by trace and compare with orbit growth.
    Classify {
        /// Matrix entries a,b,c,d (determinant 1).
        #[arg(long, value_delimiter = ',', num_args = 4)]
        matrix: Vec<f64>,
        /// Compose with the reflection z ↦ -conj(z).
        #[arg(long)]
        rev: bool,
        /// Orbit-growth sample depth.
        #[arg(long, default_value_t = 64)]
        n: u32,
    },
    /// Verify the confining conditions for Q_eps and the density claim.
    Confining {
        /// Anosov matrix entries a,b,c,d.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        phi: Vec<i64>,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long = "box", default_value_t = 50)]
        box_radius: i64,
        #[arg(long, default_value_t = 20)]
        k_cap: u32,
    },
    /// Sweep random geodesic families through the projection axioms.
    Axioms {
        /// Geodesics per configuration.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Number of seeded configurations.
        #[arg(long, default_value_t = 10)]
        sweep: u64,
        /// Minimum pairwise separation R.
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Build the projection graph and quasi-tree, then run the bottleneck
    /// check.
    Complex {
        #[arg(long, default_value_t = 8)]
        count: usize,
        #[arg(long, default_value_t = 0.1)]
        r: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Override the calibrated K.
        #[arg(long)]
        k: Option<f64>,
        /// Override the bridge length L (default: the calibrated K).
        #[arg(long)]
        l: Option<f64>,
        /// Override the discretization resolution (default theta/4).
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Build a flip tree, export its families, and run the bounded scan.
    Flip {
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 2)]
        word_cap: u32,
        /// Power range of the bounded-projection scan.
        #[arg(long, default_value_t = 10)]
        n: u32,
        /// Translation lengths of the two Schottky generators.
        #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [4.0, 6.0])]
        lengths: Vec<f64>,
    },
    /// Assemble and certify the Anosov torus-bundle poset.
    Poset {
        #[arg(long, value_delimiter = ',', num_args = 4)]
        phi: Vec<i64>,
    },
    /// Produce a main-lemma certificate for a named instance.
    Mainlemma {
        /// One of: raag, bs22, broken.
        #[arg(long, default_value = "raag")]
        instance: String,
    },
    /// Quasimorphism estimates: Busemann values, homogenization, defects.
    Qm {
        #[arg(long, value_delimiter = ',', num_args = 4)]
        phi: Vec<i64>,
        #[arg(long, default_value_t = 1000)]
        depth: u32,
        #[arg(long, default_value_t = 5)]
        seed: u64,
    },
}

/// One line of the report stream.
#[derive(Debug, Clone, Serialize)]
pub struct ReportLine {
    pub item: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<ReportLine>,
    /// DOT payload, when the subcommand produces one and it was requested.
    pub dot: Option<String>,
}

impl Report {
    fn push(&mut self, item: impl Into<String>, pass: bool, detail: serde_json::Value) {
        self.lines.push(ReportLine {
            item: item.into(),
            pass,
            detail,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Dot => self
                .dot
                .clone()
                .unwrap_or_else(|| "// no dot payload for this subcommand\n".into()),
            OutputFormat::Json => {
                let mut out = String::new();
                for line in &self.lines {
                    out.push_str(&serde_json::to_string(line).expect("report serializes"));
                    out.push('\n');
                }
                out
            }
            OutputFormat::Text => {
                let mut out = String::new();
                for line in &self.lines {
                    let tag = if line.pass { "PASS" } else { "FAIL" };
                    out.push_str(&format!("[{tag}] {} {}\n", line.item, line.detail));
                }
                let (pass, total) = (
                    self.lines.iter().filter(|l| l.pass).count(),
                    self.lines.len(),
                );
                out.push_str(&format!("{pass}/{total} checks passed\n"));
                out
            }
        }
    }
}

fn parse_phi(entries: &[i64]) -> Result<IntMatrix2, ConfigError> {
    if entries.len() != 4 {
        return Err(ConfigError::Invalid("phi needs 4 entries a,b,c,d".into()));
    }
    Ok(IntMatrix2::new(entries[0], entries[1], entries[2], entries[3]))
}

/// Executes a run; returns the report. Configuration problems (malformed
/// matrices, bad caps) surface as `ConfigError` and exit code 2.
pub fn run(config: &RunConfig) -> Result<Report, ConfigError> {
    let mut report = Report::default();
    match &config.command {
        Command::Classify { matrix, rev, n } => {
            let mut iso = Isometry::new(matrix[0], matrix[1], matrix[2], matrix[3])
                .map_err(|e| ConfigError::Invalid(format!("bad matrix: {e}")))?;
            if *rev {
                iso = iso.with_reflection();
            }
            let class = hyp2::classify(&iso)
                .map_err(|e| ConfigError::Invalid(format!("bad matrix: {e}")))?;
            report.push("classify.trace", true, json!({ "class": format!("{class:?}") }));
            let act = cyclic_action(iso);
            match classify_orbit_growth(&ZGroup, &act, &1i64, *n, &act.base) {
                Ok(growth) => {
                    let consistent = match (&class, growth.tag) {
                        (hyp2::IsometryClass::Loxodromic { translation_length, .. }, tag) => {
                            tag == crate::actions::GrowthTag::Loxodromic
                                && (growth.rate - translation_length).abs() < 1e-4
                        }
                        (hyp2::IsometryClass::Elliptic, tag)
                        | (hyp2::IsometryClass::Identity, tag) => {
                            tag == crate::actions::GrowthTag::Elliptic
                        }
                        (hyp2::IsometryClass::Parabolic { .. }, tag) => {
                            tag == crate::actions::GrowthTag::ParabolicSuspect
                        }
                        (hyp2::IsometryClass::ReversingComposite { .. }, _) => true,
                    };
                    report.push(
                        "classify.orbit_growth",
                        consistent,
                        json!({ "tag": growth.tag, "rate": growth.rate }),
                    );
                }
                Err(e) => report.push("classify.orbit_growth", false, json!({ "error": e.to_string() })),
            }
        }
        Command::Confining {
            phi,
            eps,
            box_radius,
            k_cap,
        } => {
            let phi = parse_phi(phi)?;
            let data =
                eigen(phi).map_err(|e| ConfigError::Invalid(format!("bad phi: {e}")))?;
            if *eps <= 0.0 || *box_radius <= 0 || *k_cap == 0 {
                return Err(ConfigError::Invalid("caps must be positive".into()));
            }
            let conf = verify_confining(*eps, &data, *box_radius, *k_cap)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            report.push(
                "confining.condition_a",
                conf.condition_a.pass,
                json!({ "detail": conf.condition_a.detail }),
            );
            report.push(
                "confining.condition_b",
                conf.condition_b.pass,
                json!({ "detail": conf.condition_b.detail }),
            );
            report.push(
                "confining.condition_c",
                conf.condition_c.pass,
                json!({ "detail": conf.condition_c.detail, "k0": conf.k0 }),
            );
            report.push(
                "confining.strictness",
                conf.strictness_witness.is_some(),
                json!({ "witness": conf.strictness_witness }),
            );
            // Density claim: rho(rP) is (λa)-dense in [0, λ²a].
            let u = minimal_pi_element(&data, 3);
            let (a, _) = eigen_coords(&(u.0.into(), u.1.into()), &data);
            let a = a.abs();
            let lambda = data.lambda;
            let p = build_claim_set(&data, u, 1, lambda * lambda * a * 1.5);
            let rp = words_of_length(&p, 2);
            let rhos: Vec<f64> = rp.iter().map(|q| eigen_coords(q, &data).0).collect();
            match density_scan(&rhos, (0.0, lambda * lambda * a), lambda * a) {
                Ok(d) => report.push(
                    "confining.density_claim",
                    d.pass && d.largest_gap <= lambda * a + 1e-9,
                    json!({ "largest_gap": d.largest_gap, "bound": lambda * a }),
                ),
                Err(e) => report.push("confining.density_claim", false, json!({ "error": e.to_string() })),
            }
        }
        Command::Axioms {
            count,
            sweep,
            r,
            seed,
        } => {
            if *count < 2 || *sweep == 0 || *r <= 0.0 {
                return Err(ConfigError::Invalid("caps must be positive".into()));
            }
            let constants = ThetaConstants::standard(*r);
            for i in 0..*sweep {
                let item = format!("axioms.config_{i:03}");
                match random_disjoint_geodesics(*count, *r, seed + i)
                    .and_then(|config| family_from_config(&config, &constants))
                {
                    Ok(fam) => match verify_axioms(&fam) {
                        Ok(rep) => report.push(
                            item,
                            rep.clean(),
                            json!({
                                "theta": rep.theta_used,
                                "p0": rep.p0_violations.len(),
                                "p1": rep.p1_violations.len(),
                                "max_p2": rep.max_p2_count(),
                            }),
                        ),
                        Err(e) => report.push(item, false, json!({ "error": e.to_string() })),
                    },
                    Err(e) => report.push(item, false, json!({ "error": e.to_string() })),
                }
            }
        }
        Command::Complex {
            count,
            r,
            seed,
            k,
            l,
            delta,
        } => {
            let constants = ThetaConstants::standard(*r);
            let config = random_disjoint_geodesics(*count, *r, *seed)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let fam = family_from_config(&config, &constants)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let axioms = verify_axioms(&fam).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            report.push(
                "complex.axioms",
                axioms.clean(),
                json!({ "theta": fam.theta }),
            );
            let delta_res = delta.unwrap_or(fam.theta / 4.0);
            let outcome = match k {
                Some(k) => {
                    let pg = build_projection_graph(&fam, *k)
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let qt = build_quasi_tree(&fam, &pg, l.unwrap_or(*k), delta_res)
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let half_diam = 0.5 * graph_diameter(&qt.graph);
                    bottleneck_check(&qt.graph, half_diam).map(|b| (pg, qt, b))
                }
                None => calibrate_quasi_tree(&fam, *l, delta_res),
            };
            match outcome {
                Ok((pg, qt, bott)) => {
                    report.push(
                        "complex.projection_graph",
                        pg.is_connected(),
                        json!({ "K": pg.k, "edges": pg.edges.len() }),
                    );
                    report.push(
                        "complex.bottleneck",
                        bott.delta_pass.is_some(),
                        json!({ "delta": bott.delta_pass, "L": qt.l }),
                    );
                    report.dot = Some(format!("{}\n{}", pg.to_dot(&fam), qt.to_dot()));
                }
                Err(e) => report.push("complex.bottleneck", false, json!({ "error": e.to_string() })),
            }
        }
        Command::Flip {
            depth,
            word_cap,
            n,
            lengths,
        } => {
            let tree = schottky_flip_tree((lengths[0], lengths[1]), *depth, *word_cap)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            report.push(
                "flip.tree",
                true,
                json!({
                    "nodes": tree.len(),
                    "theta": tree.constants.theta,
                    "min_separation": tree.template.min_separation,
                }),
            );
            for color in [Color::Black, Color::White] {
                let item = format!("flip.family_{color:?}").to_lowercase();
                match family_from_tree(&tree, color).and_then(|fam| {
                    verify_axioms(&fam).map_err(|e| {
                        crate::geodesic_families::GfError::InvalidParameter(e.to_string())
                    })
                }) {
                    Ok(rep) => report.push(
                        item,
                        rep.clean(),
                        json!({ "p0": rep.p0_violations.len(), "p1": rep.p1_violations.len() }),
                    ),
                    Err(e) => report.push(item, false, json!({ "error": e.to_string() })),
                }
            }
            match bounded_projection_scan(&tree, *n) {
                Ok(scan) => report.push(
                    "flip.bounded_scan",
                    scan.nonadjacent_zero,
                    json!({
                        "max_spread": scan.max_spread,
                        "comparator": scan.comparator,
                        "N": scan.n,
                    }),
                ),
                Err(e) => report.push("flip.bounded_scan", false, json!({ "error": e.to_string() })),
            }
            report.dot = Some(serde_json::to_string_pretty(&tree.to_wire()).unwrap_or_default());
        }
        Command::Poset { phi } => {
            let phi = parse_phi(phi)?;
            let data =
                eigen(phi).map_err(|e| ConfigError::Invalid(format!("bad phi: {e}")))?;
            let diagram =
                anosov_poset(&data).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            report.push(
                "poset.shape",
                diagram.nodes.len() == 4 && diagram.hasse_edges.len() == 3,
                json!({ "nodes": diagram.nodes.len(), "edges": diagram.hasse_edges.len() }),
            );
            report.push(
                "poset.witnesses",
                diagram.dominance.len() == diagram.hasse_edges.len(),
                json!({ "witnesses": diagram.dominance.len() }),
            );
            report.push(
                "poset.incomparability",
                diagram.incomparabilities.len() == 1 && diagram.consistent(),
                json!({ "pairs": diagram.incomparabilities.len(), "lambda": diagram.lambda }),
            );
            report.dot = Some(emit_dot(&diagram));
        }
        Command::Mainlemma { instance } => {
            let outcome = match instance.as_str() {
                "raag" => {
                    let group = Z2Group;
                    let act_x = lineal_from_hom(&group, |g: &(i64, i64)| g.0 as f64, &[])
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let act_y = lineal_from_hom(&group, |g: &(i64, i64)| g.1 as f64, &[])
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    check_main_lemma(&group, &act_x, &act_y, &(1, 0), &(0, 1), 64)
                        .map(|c| json!({ "instance": "raag", "certificate": c }))
                }
                "bs22" => {
                    let group = BsGroup { m: 2, n: 2 };
                    let act_x = lineal_from_hom(
                        &group,
                        |g: &BSElement| {
                            use num_traits::ToPrimitive;
                            g.a_exponent_sum().to_f64().unwrap_or(f64::NAN)
                        },
                        &[],
                    )
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let act_y = lineal_from_hom(
                        &group,
                        |g: &BSElement| g.b_exponent_sum() as f64,
                        &[],
                    )
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let a2 = bs_a_power(2, 2, 2).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let b = {
                        let mut e = BSElement::identity(2, 2)
                            .map_err(|err| ConfigError::Invalid(err.to_string()))?;
                        e.mul_b(1);
                        e
                    };
                    check_main_lemma(&group, &act_x, &act_y, &a2, &b, 64)
                        .map(|c| json!({ "instance": "bs22", "certificate": c }))
                }
                "broken" => {
                    let group = Z2Group;
                    let act_x = lineal_from_hom(&group, |g: &(i64, i64)| g.0 as f64, &[])
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    let act_y = lineal_from_hom(&group, |g: &(i64, i64)| g.1 as f64, &[])
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    check_main_lemma(&group, &act_x, &act_y, &(1, 0), &(1, 0), 64)
                        .map(|c| json!({ "instance": "broken", "certificate": c }))
                }
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "unknown instance '{other}' (expected raag, bs22, broken)"
                    )))
                }
            };
            match outcome {
                Ok(detail) => report.push("mainlemma.certificate", true, detail),
                Err(e) => report.push(
                    "mainlemma.certificate",
                    false,
                    json!({ "error": e.to_string() }),
                ),
            }
        }
        Command::Qm { phi, depth, seed } => {
            use rand::{Rng, SeedableRng};
            let phi = parse_phi(phi)?;
            let data =
                eigen(phi).map_err(|e| ConfigError::Invalid(format!("bad phi: {e}")))?;
            let group = TorusBundleGroup { data };
            let act = anosov_action(&data, AnosovSide::Plus)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            let inf = hyp2::BoundaryPoint::Infinity;
            let t = TorusBundleElement::t_power(1);
            let v_t = busemann_qm(&act, &inf, &t, *depth);
            let pass_t = v_t
                .as_ref()
                .map(|v| (v - data.lambda.ln()).abs() < 1e-5)
                .unwrap_or(false);
            report.push(
                "qm.busemann_t",
                pass_t,
                json!({ "value": v_t.as_ref().ok(), "expected": data.lambda.ln() }),
            );
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut worst: f64 = 0.0;
            let mut ok = true;
            for _ in 0..10 {
                let p = TorusBundleElement::translation(
                    rng.gen_range(-10i64..=10),
                    rng.gen_range(-10i64..=10),
                );
                match busemann_qm(&act, &inf, &p, *depth) {
                    Ok(v) => worst = worst.max(v.abs()),
                    Err(_) => ok = false,
                }
            }
            report.push(
                "qm.busemann_lattice",
                ok && worst < 1e-5,
                json!({ "max_abs_value": worst }),
            );
            // Homogenization of the Busemann map at t against log λ.
            let q = {
                let act = act.clone();
                QMap::new(
                    move |g: &TorusBundleElement| {
                        busemann_qm(&act, &hyp2::BoundaryPoint::Infinity, g, 1000)
                    },
                    f64::INFINITY,
                )
            };
            match homogenize(&group, &q, &t, 32) {
                Ok(est) => report.push(
                    "qm.homogenize_t",
                    (est.value - data.lambda.ln()).abs() < 1e-5,
                    json!({ "value": est.value, "power": est.power }),
                ),
                Err(e) => report.push("qm.homogenize_t", false, json!({ "error": e.to_string() })),
            }
            // Defect estimate over a small sampled ball.
            let pairs: Vec<(TorusBundleElement, TorusBundleElement)> = (0..30)
                .map(|_| {
                    let e = |rng: &mut rand_chacha::ChaCha8Rng| {
                        TorusBundleElement::new(
                            rng.gen_range(-5i64..=5),
                            rng.gen_range(-5i64..=5),
                            rng.gen_range(-2i64..=2),
                        )
                    };
                    (e(&mut rng), e(&mut rng))
                })
                .collect();
            match defect_estimate(&group, &q, &pairs) {
                Ok(d) => report.push("qm.defect", d.is_finite(), json!({ "estimate": d })),
                Err(e) => report.push("qm.defect", false, json!({ "error": e.to_string() })),
            }
            // Word metric vs H² orbit metric (the Schwarz–Milnor estimate).
            let spec = GeneratorSpec::QEps {
                eps: 1.0,
                side: QSide::Plus,
            };
            match word_orbit_qi(&data, &spec, 4, 40) {
                Ok(est) => report.push(
                    "qm.schwarz_milnor",
                    est.c.is_finite(),
                    json!({ "C": est.c, "pairs": est.sample_pairs }),
                ),
                Err(e) => report.push("qm.schwarz_milnor", false, json!({ "error": e.to_string() })),
            }
        }
    }
    Ok(report)
}

/// Compares the `Q_ε ∪ {t^{±1}}` word metric against the H²-orbit metric on
/// a ball, fitting the two-sided quasi-isometry constant.
pub fn word_orbit_qi(
    data: &crate::groups::AnosovData,
    spec: &GeneratorSpec,
    radius: u32,
    max_elements: usize,
) -> Result<crate::actions::QIEstimate, ConfigError> {
    use crate::actions::qi_estimate_from_tables;
    use crate::groups::{tb_inverse, tb_multiply};
    let ball = tb_word_ball(data, spec, 2 * radius, 12, 1_000_000_000, 12, 4_000_000)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let mut elements: Vec<TorusBundleElement> = ball
        .lengths
        .iter()
        .filter(|&(_, &len)| len <= radius)
        .map(|(g, _)| g.clone())
        .collect();
    elements.sort_by_key(|g| {
        (
            g.n,
            g.p.0.to_string(),
            g.p.1.to_string(),
        )
    });
    elements.truncate(max_elements);
    let act = anosov_action(data, AnosovSide::Plus)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let n = elements.len();
    let mut word_table = vec![vec![0.0f64; n]; n];
    let mut orbit_table = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let rel = tb_multiply(data, &tb_inverse(data, &elements[i]), &elements[j]);
            let len = ball.length(&rel).ok_or_else(|| {
                ConfigError::Invalid("ball radius too small for pair lengths".into())
            })?;
            word_table[i][j] = len as f64;
            let pi = act.orbit_of_base(&elements[i]).expect("H2 orbit");
            let pj = act.orbit_of_base(&elements[j]).expect("H2 orbit");
            orbit_table[i][j] = act
                .target
                .dist(&pi, &pj)
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
    }
    qi_estimate_from_tables(&word_table, &orbit_table, 1_000.0)
        .map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn graph_diameter(g: &crate::projection_complex::MetricGraph) -> f64 {
    (0..g.vertex_count())
        .flat_map(|v| g.dijkstra(v).0)
        .fold(0.0, f64::max)
}

/// Doubling calibration: K starts at 4θ and doubles until the bottleneck
/// check passes; L defaults to K.
pub fn calibrate_quasi_tree(
    fam: &crate::projection_complex::DomainFamily,
    l_override: Option<f64>,
    delta: f64,
) -> Result<
    (
        crate::projection_complex::ProjectionGraph,
        crate::projection_complex::QuasiTreeOfSpaces,
        crate::projection_complex::BottleneckReport,
    ),
    crate::projection_complex::PcError,
> {
    let mut k = 4.0 * fam.theta;
    for _ in 0..8 {
        let pg = build_projection_graph(fam, k)?;
        if pg.is_connected() {
            let qt = build_quasi_tree(fam, &pg, l_override.unwrap_or(k), delta)?;
            let half_diam = 0.5 * graph_diameter(&qt.graph) + 1e-9;
            let report = bottleneck_check(&qt.graph, half_diam)?;
            if report.delta_pass.is_some() {
                return Ok((pg, qt, report));
            }
        }
        k *= 2.0;
    }
    Err(crate::projection_complex::PcError::InvalidParameter(
        "calibration did not converge within 8 doublings".into(),
    ))
}
