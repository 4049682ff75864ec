//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_rational::Rational64;
use pingpong_cli::{run_with_workers, Command as Sub, RunConfig};
use pingpong_core::boundary::{minimality_check, proximality_run, random_measure, topological_freeness_check, ProximalityBudget};
use pingpong_core::certify::{
    freeness_certificate, noloops_bound, path_quasigeodesic_check, star_partner, star_property_check,
    star_property_check_triple, FreeProductWord, Letter, WordStatus, ENUMERATION_CAP,
};
use pingpong_core::isometry::{fix_set, fixed_ends, is_loxodromic, translation_length};
use pingpong_core::models::{Mat2, TreeModel};
use pingpong_core::partner::{loa_construct, pnaive_pipeline, PipelineParams};
use pingpong_core::{ActionModel, Dist, GroupElement, Syllable};
use serde_json::Value;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn shipped(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn c1_end_to_end() -> Verdict {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pingpong"))
        .args(["find-partner", "--config"])
        .arg(shipped("modular.toml"))
        .output()
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let rec: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || format!("exit {:?}", out.status.code()))?;
    let r = &rec["result"];
    let certs = r["certificates"].as_array().ok_or("no certificates")?;
    ensure(certs.len() == 2, || format!("{} certificates", certs.len()))?;
    for c in certs {
        ensure(c["status"] == "pass", || format!("certificate {} failed", c["subgroup"]))?;
        ensure(c["syllable_bound"] == 8 && c["exponent_bound"] == 3, || "wrong bounds".into())?;
        let oracles = c["oracles"].as_array().ok_or("no oracles")?;
        ensure(oracles.len() == 2, || format!("oracles {oracles:?}"))?;
    }
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "gamma = {}, N = {}, words checked {} + {}, {:.2}s",
        r["gamma"], r["power_n"], certs[0]["words_checked"], certs[1]["words_checked"], secs
    ))
}

fn c2_soundness() -> Verdict {
    let m = TreeModel::modular();
    let s = m.parse("s").map_err(|e| e.to_string())?;
    let cert = freeness_certificate(&m, &s, std::slice::from_ref(&s), 8, 3, ENUMERATION_CAP).map_err(|e| e.to_string())?;
    let witness_syllables = match &cert.status {
        pingpong_core::certify::CertStatus::Fail { witness } => witness.syllables(),
        _ => return Err("gamma = s passed".into()),
    };
    ensure(witness_syllables <= 4, || format!("witness has {witness_syllables} syllables"))?;

    // Every finite-order element up to length 5 against both factors, plus
    // short loxodromics whose low powers still satisfy relations.
    let mut planted: Vec<GroupElement> = m
        .elements_up_to(5)
        .into_iter()
        .filter(|g| !g.is_identity() && m.finite_order(g).is_some())
        .collect();
    planted.extend(["st", "ts", "st^2"].iter().map(|w| m.parse(w).unwrap()));
    let subgroups = [m.parse("s").unwrap(), m.parse("t").unwrap()];
    let mut cases = 0;
    for g in &planted {
        for h in &subgroups {
            let cert = freeness_certificate(&m, g, std::slice::from_ref(h), 8, 3, ENUMERATION_CAP).map_err(|e| e.to_string())?;
            cases += 1;
            ensure(!cert.passed(), || format!("false pass for gamma = {} with <{}>", m.show(g), m.show(h)))?;
        }
    }
    ensure(cases >= 20, || format!("only {cases} planted cases"))?;
    Ok(format!("witness for s has {witness_syllables} syllable(s); {cases} planted non-partners, 0 false passes"))
}

fn c3_loa() -> Verdict {
    let f2 = TreeModel::free_group(2).unwrap();
    let mut done = 0;
    let mut seed = 0u64;
    let mut worst = (0, 0);
    while done < 100 {
        let g1 = f2.random_element(1 + (seed % 5) as usize, 2 * seed);
        let g2 = f2.random_element(1 + ((seed / 5) % 5) as usize, 2 * seed + 1);
        seed += 1;
        let (p1, m1) = fixed_ends(&f2, &g1).map_err(|e| e.to_string())?;
        let (p2, m2) = fixed_ends(&f2, &g2).map_err(|e| e.to_string())?;
        if [&p2, &m2].contains(&&p1) || [&p2, &m2].contains(&&m1) {
            continue;
        }
        let v = p1.cylinder(2);
        let u = m2.cylinder(2);
        let out = loa_construct(&f2, &g1, &g2, &u, &v, 10)
            .map_err(|e| format!("{} / {}: {e}", f2.show(&g1), f2.show(&g2)))?;
        let (p, mi) = fixed_ends(&f2, &out.element).map_err(|e| e.to_string())?;
        ensure(is_loxodromic(&f2, &out.element).unwrap() && p.in_cylinder(&v) && mi.in_cylinder(&u), || {
            format!("bad product for {} / {}", f2.show(&g1), f2.show(&g2))
        })?;
        ensure(out.n <= 10 && out.k <= 10, || "exponent budget exceeded".into())?;
        worst = (worst.0.max(out.n), worst.1.max(out.k));
        done += 1;
    }
    Ok(format!("100/100 pairs (from {seed} draws), largest exponents n = {}, k = {}", worst.0, worst.1))
}

fn c4_axis_closure() -> Verdict {
    let m = TreeModel::modular();
    let mut subgroups: Vec<GroupElement> = Vec::new();
    for x in m.elements_up_to(3) {
        for h in ["s", "t"] {
            let g = m.conj(&m.parse(h).unwrap(), &x);
            if !subgroups.contains(&g) {
                subgroups.push(g);
            }
        }
    }
    let gammas: Vec<(GroupElement, _)> = m
        .elements_up_to(6)
        .into_iter()
        .filter(|g| is_loxodromic(&m, g).unwrap())
        .map(|g| {
            let ends = fixed_ends(&m, &g).unwrap();
            (g, ends)
        })
        .collect();
    let (mut pairs, mut antecedents) = (0u64, 0u64);
    for h in &subgroups {
        let fix = fix_set(&m, std::slice::from_ref(h), &Dist::ZERO, 6, 3).map_err(|e| e.to_string())?;
        for (g, (plus, minus)) in &gammas {
            pairs += 1;
            if fix.closure_contains(minus) {
                antecedents += 1;
                ensure(fix.closure_contains(plus), || format!("exception: H = <{}>, gamma = {}", m.show(h), m.show(g)))?;
            }
        }
    }
    Ok(format!(
        "{} subgroups x {} loxodromics = {pairs} pairs, {antecedents} with gamma- in the closure, 0 exceptions",
        subgroups.len(),
        gammas.len()
    ))
}

fn alternating_words(subs: &[GroupElement], max_syllables: usize) -> Vec<FreeProductWord> {
    let powers = [1i64, -1, 2, -2];
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..max_syllables {
        let mut next = Vec::new();
        for w in &frontier {
            let after_power = matches!(w.last(), Some(Letter::Power(_)));
            let after_sub = matches!(w.last(), Some(Letter::Sub(_)));
            if !after_sub {
                for h in subs {
                    next.push([w.clone(), vec![Letter::Sub(h.clone())]].concat());
                }
            }
            if !after_power {
                for &e in &powers {
                    next.push([w.clone(), vec![Letter::Power(e)]].concat());
                }
            }
        }
        out.extend(next.iter().cloned().map(FreeProductWord));
        frontier = next;
    }
    out
}

fn c5_constants() -> Verdict {
    let m = TreeModel::modular();
    let model: ActionModel = m.clone().into();
    let cases: [&[&str]; 3] = [&["s", "t"], &["s"], &["tst^2"]];
    let mut geodesic_words = 0;
    let mut summary = Vec::new();
    for case in cases {
        let hs: Vec<Vec<GroupElement>> = case.iter().map(|w| vec![m.parse(w).unwrap()]).collect();
        let out = pnaive_pipeline(&model, &hs, PipelineParams::default()).map_err(|e| e.to_string())?;
        let p = &out.partner;
        let mut expect = p.k1.max(Dist::exact(p.k2.as_rational().unwrap() * p.k2.as_rational().unwrap()));
        for s in &p.per_subgroup {
            expect = expect.max(s.d_observed).max(s.dprime_observed);
        }
        ensure(p.delta.is_zero(), || "delta is not 0".into())?;
        ensure(p.delta_big == expect, || format!("Delta = {}, expected {expect}", p.delta_big))?;
        let c = p.delta_big.scale(Rational64::from_integer(10));
        ensure(p.c == c, || format!("C = {}, 10 Delta = {c}", p.c))?;
        let ell = translation_length(&model, &out.gamma_n).map_err(|e| e.to_string())?;
        ensure(ell >= p.c, || format!("l(gamma^N) = {ell} < C = {}", p.c))?;
        ensure(out.passed(), || "certificate failed".into())?;
        for h in &hs {
            let fix = fix_set(&m, h, &Dist::ZERO, 4, 1).map_err(|e| e.to_string())?;
            let base = fix.sites.first().ok_or("no fixed vertex")?.clone();
            let subs: Vec<GroupElement> =
                (1..m.finite_order(&h[0]).unwrap() as i64).map(|k| m.pow(&h[0], k)).collect();
            for w in alternating_words(&subs, 4) {
                let r = path_quasigeodesic_check(&m, &out.gamma_n, &w, &base, &p.delta_big).map_err(|e| e.to_string())?;
                ensure(r.exact_geodesic, || format!("{} is not geodesic", w.show(&m)))?;
                geodesic_words += 1;
            }
        }
        summary.push(format!("Delta = {}, C = {}, l = {ell}", p.delta_big, p.c));
    }
    ensure(geodesic_words >= 50, || format!("only {geodesic_words} words"))?;
    Ok(format!("{}; {geodesic_words} certified words exactly geodesic", summary.join("; ")))
}

fn c6_star() -> Verdict {
    let f2 = TreeModel::free_group(2).unwrap();
    let parse = |ws: &[&str]| ws.iter().map(|w| f2.parse(w).unwrap()).collect::<Vec<_>>();
    let m_set = parse(&["a", "b", "ab", "Ab"]);
    let u = star_partner(&f2, &m_set, 4).map_err(|e| e.to_string())?;
    let n = noloops_bound(&f2, &u, &m_set, 3, 8).map_err(|e| e.to_string())?;
    let mut counts = Vec::new();
    for m in [2, 3] {
        let r = star_property_check(&f2, &m_set, m, &u, n).map_err(|e| e.to_string())?;
        ensure(r.passed(), || format!("m = {m} failed"))?;
        ensure(r.products_checked <= 1728, || format!("{} products", r.products_checked))?;
        counts.push(r.products_checked);
    }
    // The criterion's M admits no relation among conjugates (its image in
    // the abelianization never vanishes), so the broken triple is tested
    // against M together with its inverses.
    let symmetric: Vec<GroupElement> = m_set.iter().flat_map(|g| [g.clone(), f2.inv(g)]).collect();
    let honest = star_property_check(&f2, &symmetric, 2, &u, n).map_err(|e| e.to_string())?;
    ensure(honest.passed(), || "symmetric M fails with the honest triple".into())?;
    let broken = parse(&["a", "a^2", "a^3"]);
    let r = star_property_check_triple(&f2, &symmetric, 2, &[broken[0].clone(), broken[1].clone(), broken[2].clone()])
        .map_err(|e| e.to_string())?;
    let witness = match r.status {
        WordStatus::Fail { witness } => witness,
        WordStatus::Pass => return Err("broken triple (a, a^2, a^3) passed".into()),
    };
    Ok(format!(
        "u = {}, N = {n}, {} + {} products pass; broken triple fails at g = {:?}, x = {:?}",
        f2.show(&u),
        counts[0],
        counts[1],
        witness.0.iter().map(|&i| f2.show(&symmetric[i])).collect::<Vec<_>>(),
        witness.1
    ))
}

fn c7_boundary() -> Verdict {
    let f2 = TreeModel::free_group(2).unwrap();
    let tol = Rational64::new(1, 100);
    let mut longest = 0;
    for seed in 0..5u64 {
        let mu1 = random_measure(&f2, 3, 100 + 2 * seed);
        let mu2 = random_measure(&f2, 3, 101 + 2 * seed);
        let zeta = random_measure(&f2, 1, 500 + seed).atoms()[0].0.clone();
        let tr = proximality_run(&f2, &mu1, &mu2, &zeta, 3, tol, ProximalityBudget::default())
            .map_err(|e| format!("seed {seed}: {e}"))?;
        let last = tr.sequence.last().ok_or("no elements needed; measures already concentrated")?;
        ensure(tr.sequence.len() <= 20, || format!("{} elements", tr.sequence.len()))?;
        for mu in [&mu1, &mu2] {
            let pushed = pingpong_core::boundary::push_measure(&f2, last, mu).map_err(|e| e.to_string())?;
            ensure(pushed.mass_in(&tr.target) >= Rational64::from_integer(1) - tol, || format!("seed {seed}: mass too low"))?;
        }
        longest = longest.max(tr.sequence.len());
    }
    let m = TreeModel::modular();
    let mut elements = 0;
    for t in [&f2, &m] {
        for g in t.elements_up_to(3).into_iter().filter(|g| !g.is_identity()) {
            let r = topological_freeness_check(t, &g, 3).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("topological freeness fails for {}", t.show(&g)))?;
            elements += 1;
        }
    }
    for t in [&f2, &m] {
        for seed in 0..10 {
            let xi = random_measure(t, 1, 900 + seed).atoms()[0].0.clone();
            ensure(minimality_check(t, &xi, 2, 6).passed(), || format!("end {} is not dense at depth 2", t.show_end(&xi)))?;
        }
    }
    Ok(format!(
        "5 proximality runs used at most {longest} element(s); {elements} elements topologically free at depth 3; 20 ends dense at depth 2"
    ))
}

fn c8_oracles() -> Verdict {
    let m = TreeModel::modular();
    let s = m.matrix_eval(&m.parse("s").unwrap()).map_err(|e| e.to_string())?;
    let t = m.matrix_eval(&m.parse("t").unwrap()).map_err(|e| e.to_string())?;
    let t_inv = m.matrix_eval(&m.parse("t^-1").unwrap()).map_err(|e| e.to_string())?;
    let letters = [(Syllable::new(0, 1), &s), (Syllable::new(1, 1), &t), (Syllable::new(1, -1), &t_inv)];
    let mut frontier: Vec<(Vec<Syllable>, Mat2)> = vec![(Vec::new(), Mat2::identity())];
    let (mut words, mut trivial) = (1u64, 1u64);
    for _ in 0..10 {
        let mut next = Vec::with_capacity(frontier.len() * 3);
        for (w, mat) in &frontier {
            for (syl, gm) in &letters {
                let mut w2 = w.clone();
                w2.push(*syl);
                let mat2 = mat * *gm;
                let reduced = m.reduce(&w2).map_err(|e| e.to_string())?;
                ensure(reduced.is_identity() == mat2.is_projective_identity(), || format!("disagreement on {w2:?}"))?;
                words += 1;
                trivial += u64::from(reduced.is_identity());
                next.push((w2, mat2));
            }
        }
        frontier = next;
    }
    Ok(format!("{words} words over s, t, t^-1 up to length 10, {trivial} trivial, 0 disagreements"))
}

fn c9_determinism() -> Verdict {
    let mut runs = 0;
    for cfg in ["modular.toml", "free2.toml"] {
        let text = std::fs::read_to_string(shipped(cfg)).map_err(|e| e.to_string())?;
        let cfg_parsed = RunConfig::from_toml(&text)?;
        for sub in Sub::ALL {
            let a = run_with_workers(sub, &cfg_parsed, Some(1)).render();
            let b = run_with_workers(sub, &cfg_parsed, Some(4)).render();
            let c = run_with_workers(sub, &cfg_parsed, None).render();
            ensure(a == b && b == c, || format!("{sub} on {cfg} differs"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} subcommand/config pairs byte-identical at 1, 4 and default workers"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("end-to-end partner for Z/2*Z/3 with <s>, <t>", c1_end_to_end),
        ("freeness oracle rejects planted non-partners", c2_soundness),
        ("loxodromic with prescribed end cylinders", c3_loa),
        ("fixed-set closure invariant for axes", c4_axis_closure),
        ("ping-pong constants and geodesic paths", c5_constants),
        ("property (*) suite", c6_star),
        ("boundary dynamics suite", c7_boundary),
        ("normal form vs. PSL(2,Z) matrices", c8_oracles),
        ("determinism across worker counts", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
