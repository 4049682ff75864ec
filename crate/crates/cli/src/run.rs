use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use pingpong_core::boundary::{
    minimality_check, proximality_run, random_measure, topological_freeness_check, EndMeasure, ProximalityBudget,
};
use pingpong_core::certify::{
    freeness_certificate, noloops_bound, noloops_check, star_partner, star_property_check,
    star_property_check_triple, CertStatus, FreenessCertificate, StarReport, WordStatus,
};
use pingpong_core::isometry::{acylindricity_probe, classify, translation_length, IsometryClass};
use pingpong_core::models::{PlaneModel, TreeModel};
use pingpong_core::partner::{pnaive_pipeline, EscapeBudget, PipelineParams};
use pingpong_core::{ActionModel, Dist, Error, GroupElement};
use serde_json::{json, Value};

use crate::config::{ModelConfig, RunConfig};
use crate::record::{envelope, Outcome, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    FindPartner,
    CertifyFree,
    CheckStar,
    CheckNoloops,
    BoundaryDemo,
    ProbeAcylindricity,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Classify,
        Command::FindPartner,
        Command::CertifyFree,
        Command::CheckStar,
        Command::CheckNoloops,
        Command::BoundaryDemo,
        Command::ProbeAcylindricity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::FindPartner => "find-partner",
            Command::CertifyFree => "certify-free",
            Command::CheckStar => "check-star",
            Command::CheckNoloops => "check-noloops",
            Command::BoundaryDemo => "boundary-demo",
            Command::ProbeAcylindricity => "probe-acylindricity",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown subcommand {s:?}"))
    }
}

/// A failure that ends the run early.
struct Stop(Status, String);

impl From<Error> for Stop {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Alphabet { .. } => Status::ParseError,
            Error::Unsupported(_) => Status::Unsupported,
            Error::OracleDisagreement { .. } => Status::Fail,
            _ => Status::Refused,
        };
        Stop(status, e.to_string())
    }
}

type Step<T> = Result<T, Stop>;

/// Runs on a pool of `workers` threads, or the global pool when `None`.
pub fn run_with_workers(command: Command, cfg: &RunConfig, workers: Option<usize>) -> Outcome {
    match workers {
        None => run(command, cfg),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(|| run(command, cfg)),
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Outcome {
    let config = serde_json::to_value(cfg).expect("config serializes");
    let result = cfg.validate().map_err(|m| Stop(Status::ParseError, m)).and_then(|()| dispatch(command, cfg));
    match result {
        Ok((status, body)) => envelope(command.name(), &config, status, ("result", body)),
        Err(Stop(status, message)) => envelope(command.name(), &config, status, ("error", json!({ "message": message }))),
    }
}

fn dispatch(command: Command, cfg: &RunConfig) -> Step<(Status, Value)> {
    let model = build_model(&cfg.model)?;
    match command {
        Command::Classify => cmd_classify(&model, cfg),
        Command::FindPartner => cmd_find_partner(&model, cfg),
        Command::CertifyFree => cmd_certify_free(&model, cfg),
        Command::CheckStar => cmd_check_star(&model, cfg),
        Command::CheckNoloops => cmd_check_noloops(&model, cfg),
        Command::BoundaryDemo => cmd_boundary_demo(&model, cfg),
        Command::ProbeAcylindricity => cmd_probe_acylindricity(&model, cfg),
    }
}

fn build_model(m: &ModelConfig) -> Step<ActionModel> {
    Ok(match m {
        ModelConfig::FreeGroup { rank } => TreeModel::free_group(*rank)?.into(),
        ModelConfig::FreeProduct { orders } => match orders[..] {
            [p, q] => TreeModel::free_product(p, q)?.into(),
            _ => return Err(Stop(Status::Unsupported, "free products need exactly two factor orders".into())),
        },
        ModelConfig::HalfPlane { matrices } => ActionModel::Plane(PlaneModel::new(matrices.clone())?),
    })
}

fn parse_all(model: &ActionModel, words: &[String]) -> Step<Vec<GroupElement>> {
    words.iter().map(|w| model.parse(w).map_err(Stop::from)).collect()
}

fn subgroups(model: &ActionModel, cfg: &RunConfig) -> Step<Vec<Vec<GroupElement>>> {
    cfg.subgroups.iter().map(|h| parse_all(model, h)).collect()
}

fn show_all(model: &ActionModel, gs: &[GroupElement]) -> Vec<String> {
    gs.iter().map(|g| model.show(g)).collect()
}

fn worst(statuses: impl IntoIterator<Item = Status>) -> Status {
    statuses.into_iter().max().unwrap_or(Status::Pass)
}

fn cmd_classify(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    let t = model.as_tree()?;
    let mut out = Vec::new();
    for g in parse_all(model, &cfg.classify.elements)? {
        let r = classify(model, &g)?;
        let ends = r.ends.as_ref().map(|(p, m)| json!({ "plus": t.show_end(p), "minus": t.show_end(m) }));
        let axis: Vec<String> = r.axis_sample.iter().filter_map(|s| s.path()).map(|p| t.show_path(p)).collect();
        out.push(json!({
            "element": model.show(&g),
            "class": match r.class { IsometryClass::Elliptic => "elliptic", IsometryClass::Loxodromic => "loxodromic" },
            "translation_length": r.translation_length.to_string(),
            "slack": r.slack.to_string(),
            "axis_sample": axis,
            "ends": ends,
        }));
    }
    Ok((Status::Pass, json!({ "elements": out })))
}

fn certificate_json(t: &TreeModel, c: &FreenessCertificate) -> Value {
    let (status, witness) = match &c.status {
        CertStatus::Pass => ("pass", Value::Null),
        CertStatus::Fail { witness } => ("fail", json!({ "word": witness.show(t), "syllables": witness.syllables() })),
    };
    json!({
        "gamma_n": t.show(&c.gamma_n),
        "subgroup": c.subgroup.iter().map(|h| t.show(h)).collect::<Vec<_>>(),
        "subgroup_order": c.subgroup_order,
        "syllable_bound": c.syllable_bound,
        "exponent_bound": c.exponent_bound,
        "words_checked": c.words_checked,
        "status": status,
        "witness": witness,
        "oracles": c.oracles,
    })
}

fn cert_status(c: &FreenessCertificate) -> Status {
    if c.passed() {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn cmd_find_partner(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    if !model.certificate_capable() {
        return Err(Stop(Status::Unsupported, "find-partner needs an exact tree model".into()));
    }
    let t = model.as_tree()?;
    let hs = subgroups(model, cfg)?;
    let b = &cfg.bounds;
    let params = PipelineParams {
        region_radius: b.region_radius,
        depth: b.depth,
        syllable_bound: b.syllable_bound,
        exponent_bound: b.exponent_bound,
        budget: EscapeBudget { max_len: b.escape_max_len, max_exp: b.escape_max_exp },
        enumeration_cap: u128::from(b.enumeration_cap),
    };
    let out = pnaive_pipeline(model, &hs, params)?;
    let p = &out.partner;
    let per_subgroup: Vec<Value> = p
        .per_subgroup
        .iter()
        .map(|s| {
            json!({
                "subgroup": show_all(model, &s.subgroup),
                "d_observed": s.d_observed.to_string(),
                "dprime_observed": s.dprime_observed.to_string(),
                "ends_outside_closure": s.ends_outside_closure,
                "pair_preservation_checked": s.pair_preservation_checked,
            })
        })
        .collect();
    let status = worst(out.certificates.iter().map(cert_status));
    Ok((
        status,
        json!({
            "escape_route": out.escape_route,
            "gamma": t.show(&p.gamma),
            "translation_length": p.translation_length.to_string(),
            "power_n": p.power_n,
            "gamma_n": t.show(&out.gamma_n),
            "gamma_n_translation_length": translation_length(model, &out.gamma_n)?.to_string(),
            "constants": {
                "delta": p.delta.to_string(),
                "k1": p.k1.to_string(),
                "k2": p.k2.to_string(),
                "delta_big": p.delta_big.to_string(),
                "c": p.c.to_string(),
                "region_radius": p.region_radius,
                "per_subgroup": per_subgroup,
            },
            "certificates": out.certificates.iter().map(|c| certificate_json(t, c)).collect::<Vec<_>>(),
        }),
    ))
}

fn cmd_certify_free(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    if !model.certificate_capable() {
        return Err(Stop(Status::Unsupported, "certificates need an exact tree model".into()));
    }
    let t = model.as_tree()?;
    let gamma_n = model.parse(&cfg.certify_free.gamma_n)?;
    let b = &cfg.bounds;
    let certs = subgroups(model, cfg)?
        .iter()
        .map(|h| freeness_certificate(t, &gamma_n, h, b.syllable_bound, b.exponent_bound, u128::from(b.enumeration_cap)))
        .collect::<Result<Vec<_>, Error>>()?;
    let status = worst(certs.iter().map(cert_status));
    Ok((status, json!({ "certificates": certs.iter().map(|c| certificate_json(t, c)).collect::<Vec<_>>() })))
}

fn star_json(model: &ActionModel, m_set: &[GroupElement], m: usize, r: &StarReport) -> (Status, Value) {
    let (status, witness) = match &r.status {
        WordStatus::Pass => (Status::Pass, Value::Null),
        WordStatus::Fail { witness: (gi, xi) } => {
            let gs: Vec<String> = gi.iter().map(|&i| model.show(&m_set[i])).collect();
            let xs: Vec<&str> = xi.iter().map(|&i| ["a", "b", "c"][i]).collect();
            (Status::Fail, json!({ "g": gs, "x": xs }))
        }
    };
    (
        status,
        json!({ "m": m, "products_checked": r.products_checked, "status": status.name(), "witness": witness }),
    )
}

fn cmd_check_star(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    let t = model.as_tree()?;
    let s = &cfg.star;
    let m_set = parse_all(model, &s.m_set)?;
    let mut checks = Vec::new();
    let mut statuses = Vec::new();
    let body = if let Some(words) = &s.triple {
        let v = parse_all(model, words)?;
        let triple = [v[0].clone(), v[1].clone(), v[2].clone()];
        for &m in &s.m {
            let (st, j) = star_json(model, &m_set, m, &star_property_check_triple(t, &m_set, m, &triple)?);
            statuses.push(st);
            checks.push(j);
        }
        json!({ "triple": show_all(model, &triple), "checks": checks })
    } else {
        let u = match &s.u {
            Some(w) => model.parse(w)?,
            None => star_partner(t, &m_set, s.partner_max_len)?,
        };
        let k_max = s.m.iter().copied().max().unwrap_or(1);
        let n = match s.n {
            Some(n) => n,
            None => noloops_bound(t, &u, &m_set, k_max, s.n_cap)?,
        };
        for &m in &s.m {
            let (st, j) = star_json(model, &m_set, m, &star_property_check(t, &m_set, m, &u, n)?);
            statuses.push(st);
            checks.push(j);
        }
        json!({ "u": model.show(&u), "n": n, "checks": checks })
    };
    Ok((worst(statuses), body))
}

fn cmd_check_noloops(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    let t = model.as_tree()?;
    let c = &cfg.noloops;
    let u = model.parse(&c.u)?;
    let gs = parse_all(model, &c.elements)?;
    let r = noloops_check(t, &u, &gs, c.n, c.exp_bound)?;
    let (status, witness) = match &r.status {
        WordStatus::Pass => (Status::Pass, Value::Null),
        WordStatus::Fail { witness } => (Status::Fail, json!(witness)),
    };
    Ok((
        status,
        json!({
            "u": model.show(&u),
            "elements": show_all(model, &gs),
            "n": r.n,
            "exp_bound": r.exp_bound,
            "words_checked": r.words_checked,
            "witness_exponents": witness,
        }),
    ))
}

fn measure_json(t: &TreeModel, mu: &EndMeasure) -> Value {
    mu.atoms().iter().map(|(e, w)| json!({ "end": t.show_end(e), "weight": w.to_string() })).collect()
}

fn cmd_boundary_demo(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    let t = model.as_tree()?;
    let c = &cfg.boundary;
    let seed = cfg.seed.ok_or_else(|| Stop(Status::ParseError, "boundary-demo needs a seed".into()))?;
    let tol = Rational64::from_str(&c.tolerance)
        .map_err(|_| Stop(Status::ParseError, format!("boundary.tolerance {:?} is not p/q", c.tolerance)))?;
    let mu1 = random_measure(t, c.atoms, seed);
    let mu2 = random_measure(t, c.atoms, seed.wrapping_add(1));
    let zeta = match &c.target {
        Some(text) => t.parse_end(text)?,
        None => random_measure(t, 1, seed.wrapping_add(2)).atoms()[0].0.clone(),
    };
    let budget = ProximalityBudget { steps: c.steps, ..ProximalityBudget::default() };
    let mut statuses = Vec::new();
    let proximality = match proximality_run(t, &mu1, &mu2, &zeta, c.target_depth, tol, budget) {
        Ok(tr) => {
            statuses.push(Status::Pass);
            let steps: Vec<Value> = tr
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "element": t.show(&s.element),
                        "repelling_cylinder": t.show_labels(s.repelling_cylinder.labels()),
                        "power": s.power,
                        "masses": [s.masses.0.to_string(), s.masses.1.to_string()],
                    })
                })
                .collect();
            json!({
                "status": "pass",
                "target_cylinder": t.show_labels(tr.target.labels()),
                "elements_used": tr.sequence.len(),
                "steps": steps,
            })
        }
        Err(e) => {
            let stop = Stop::from(e);
            statuses.push(stop.0);
            json!({ "status": stop.0.name(), "message": stop.1 })
        }
    };

    let mut freeness_failures = Vec::new();
    let mut checked = 0usize;
    for g in t.elements_up_to(c.freeness_max_len).into_iter().filter(|g| !g.is_identity()) {
        let r = topological_freeness_check(t, &g, c.freeness_depth)?;
        checked += 1;
        if !r.passed() {
            let offending: Vec<String> = r.offending.iter().map(|c| t.show_labels(c.labels())).collect();
            freeness_failures.push(json!({ "element": t.show(&g), "offending": offending }));
        }
    }
    statuses.push(if freeness_failures.is_empty() { Status::Pass } else { Status::Fail });

    let mut minimality = Vec::new();
    for i in 0..c.minimality_ends {
        let xi = random_measure(t, 1, seed.wrapping_add(3 + i as u64)).atoms()[0].0.clone();
        let r = minimality_check(t, &xi, c.minimality_depth, c.minimality_max_len);
        statuses.push(if r.passed() { Status::Pass } else { Status::Fail });
        let uncovered: Vec<String> = r.uncovered.iter().map(|c| t.show_labels(c.labels())).collect();
        minimality.push(json!({ "end": t.show_end(&xi), "passed": r.passed(), "uncovered": uncovered }));
    }

    Ok((
        worst(statuses),
        json!({
            "measures": [measure_json(t, &mu1), measure_json(t, &mu2)],
            "target": t.show_end(&zeta),
            "tolerance": tol.to_string(),
            "proximality": proximality,
            "topological_freeness": {
                "depth": c.freeness_depth,
                "elements_checked": checked,
                "failures": freeness_failures,
            },
            "minimality": { "depth": c.minimality_depth, "ends": minimality },
        }),
    ))
}

fn cmd_probe_acylindricity(model: &ActionModel, cfg: &RunConfig) -> Step<(Status, Value)> {
    let t = model.as_tree()?;
    let a = &cfg.acylindricity;
    let eps = Dist::from_int(a.epsilon as i64);
    let m = Dist::from_int(a.m as i64);
    let value = acylindricity_probe(t, &eps, &m, cfg.bounds.region_radius, a.word_length_cap)?;
    Ok((
        Status::Pass,
        json!({
            "epsilon": a.epsilon,
            "m": a.m,
            "region_radius": cfg.bounds.region_radius,
            "word_length_cap": a.word_length_cap,
            "max_quasi_stabilizer": value,
        }),
    ))
}
