//! Reproduces the worked examples and small counts, one row per check.

use std::time::Instant;

use commdist_core::census::{count_commuting_pairs, count_dist_le_2, distance_census, CensusMode};
use commdist_core::commute::{
    centralizer_basis, derogatory, dist_le_2, distance, lift_m, minor_count, pc_search, pc_verify, validate_chain,
    DistanceKind, PcRoute,
};
use commdist_core::graph::{components, restricted_chain, RestrictedOutcome};
use commdist_core::{fixtures, Field, FieldSpec, FiniteField, Rationals, Result};
use serde_json::{json, Value};

pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
    pub millis: u128,
}

fn gf(spec: &str) -> FiniteField {
    match FieldSpec::parse(spec).expect("builtin spec") {
        FieldSpec::Finite(f) => f,
        FieldSpec::Rationals(_) => unreachable!("builtin specs are finite"),
    }
}

fn check(out: &mut Vec<Check>, name: &str, expected: &str, body: impl FnOnce() -> Result<String>) {
    let start = Instant::now();
    let actual = body().unwrap_or_else(|e| format!("error: {e}"));
    out.push(Check {
        name: name.into(),
        expected: expected.into(),
        pass: actual == expected,
        actual,
        millis: start.elapsed().as_millis(),
    });
}

fn kind_text(k: &DistanceKind) -> String {
    match k {
        DistanceKind::Exact(d) => d.to_string(),
        DistanceKind::Infinite => "inf".into(),
        DistanceKind::Bounded { lower, upper: Some(u) } => format!("{lower}..{u}"),
        DistanceKind::Bounded { lower, upper: None } => format!(">={lower}"),
    }
}

pub fn run_all() -> Vec<Check> {
    let mut out = Vec::new();

    check(&mut out, "ex25 distance over QQ", "2 (chain ok)", || {
        let a = fixtures::rational("ex25_A")?;
        let b = fixtures::rational("ex25_B")?;
        let r = distance(&a, &b)?;
        let ok = validate_chain(&a, &b, &r.chain)?;
        Ok(format!("{} (chain {})", kind_text(&r.kind), if ok { "ok" } else { "bad" }))
    });

    check(&mut out, "ex25 shared commuter C", "true", || {
        let a = fixtures::rational("ex25_A")?;
        let b = fixtures::rational("ex25_B")?;
        let c = fixtures::rational("ex25_C")?;
        Ok(validate_chain(&a, &b, &[c])?.to_string())
    });

    check(&mut out, "ex32 lift template", "true", || {
        let mut all = true;
        for name in ["ex25_A", "ex25_B", "ex25_C", "ex410_A", "ex410_B"] {
            let a = fixtures::rational(name)?;
            all &= fixtures::ex32_template(&a)? == lift_m(&a)?.matrix;
        }
        Ok(all.to_string())
    });

    check(&mut out, "maximal minors for n = 3", "393822", || Ok(minor_count(3).to_string()));

    for spec in ["gf(2)", "gf(3)"] {
        check(&mut out, &format!("Mat_2({spec}) distance-2 pairs"), "0", || {
            let c = distance_census(&gf(spec), 2)?;
            Ok(c.by_distance.get(2).copied().unwrap_or(0).to_string())
        });
        check(&mut out, &format!("Mat_2({spec}) disconnected"), "true", || {
            Ok((components(&gf(spec), 2)?.len() > 1).to_string())
        });
    }

    check(&mut out, "Mat_3(gf(2)) rank criterion = graph distance <= 2", "true", || {
        let f = gf("gf(2)");
        let by_rank = count_dist_le_2(&f, 3, CensusMode::Exhaustive)?.count();
        let by_graph = distance_census(&f, 3)?.at_most(2);
        Ok((by_rank == Some(by_graph)).to_string())
    });

    check(&mut out, "ex46 A derogatory, dims over QQ", "true 6 4", || {
        let a = fixtures::rational("ex46_A")?;
        let b = fixtures::rational("ex46_B")?;
        Ok(format!("{} {} {}", derogatory(&a)?, centralizer_basis(&a)?.len(), centralizer_basis(&b)?.len()))
    });

    for spec in ["gf(3)", "gf(7)"] {
        check(&mut out, &format!("ex46 over {spec}"), ">=4", || {
            let f = gf(spec);
            let a = fixtures::matrix("ex46_A", &f)?;
            let b = fixtures::matrix("ex46_B", &f)?;
            if let RestrictedOutcome::Chain(..) = restricted_chain(&a, &b, 1 << 22)? {
                return Ok("chain of length 3".into());
            }
            Ok(kind_text(&distance(&a, &b)?.kind))
        });
    }

    check(&mut out, "ex46 certificate over gf(9)", "verified", || {
        let f = gf("gf(9):1,0,1");
        let a = fixtures::matrix("ex46_A", &f)?;
        let b = fixtures::matrix("ex46_B", &f)?;
        Ok(match pc_search(&a, &b)?.certificate() {
            Some(c) if pc_verify(&a, &b, c)? => "verified".into(),
            Some(_) => "rejected".into(),
            None => "none".into(),
        })
    });

    check(&mut out, "ex46 certificate over QQ uses the minimal polynomial", "derogatory_a", || {
        let a = fixtures::rational("ex46_A")?;
        let b = fixtures::rational("ex46_B")?;
        let out = pc_search(&a, &b)?;
        Ok(match out {
            commdist_core::commute::PcOutcome::Found { route: PcRoute::DerogatoryA, cert } => {
                let mut mp = a.min_poly()?;
                mp.remove(0);
                let lead = mp.iter().find(|c| !Rationals.is_zero(c)).cloned().expect("nonzero");
                let mp: Vec<_> = mp.iter().map(|c| Rationals.div(c, &lead).expect("nonzero")).collect();
                if mp == cert.cs { "derogatory_a".into() } else { "different p".into() }
            }
            other => other.to_json(&Rationals)["route"].to_string(),
        })
    });

    check(&mut out, "ex410 over gf(9)", "3 (chain ok)", || {
        let f = gf("gf(9):1,0,1");
        let m = |n: &str| fixtures::matrix(n, &f);
        let (a, b) = (m("ex410_A")?, m("ex410_B")?);
        let given = validate_chain(&a, &b, &[m("ex410_C")?, m("ex410_D")?])?;
        let r = distance(&a, &b)?;
        let ok = given && validate_chain(&a, &b, &r.chain)?;
        Ok(format!("{} (chain {})", kind_text(&r.kind), if ok { "ok" } else { "bad" }))
    });

    check(&mut out, "ex410 over gf(3) has no length-3 chain", "true", || {
        let f = gf("gf(3)");
        let a = fixtures::matrix("ex410_A", &f)?;
        let b = fixtures::matrix("ex410_B", &f)?;
        let none = matches!(restricted_chain(&a, &b, 1 << 22)?, RestrictedOutcome::NoChain { .. });
        Ok((none && !dist_le_2(&a, &b)?).to_string())
    });

    check(&mut out, "commuting pairs Mat_2(gf(2))", "88", || {
        let r = count_commuting_pairs(&gf("gf(2)"), 2)?;
        Ok(r.count().map_or("n/a".into(), |c| c.to_string()))
    });

    out
}

pub fn render(checks: &[Check]) -> String {
    let w = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for c in checks {
        let status = if c.pass { "PASS" } else { "FAIL" };
        s.push_str(&format!("{status}  {:<w$}  expected {:<14} got {:<14} {:>6} ms\n", c.name, c.expected, c.actual, c.millis));
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    s.push_str(&format!("{passed}/{} checks passed\n", checks.len()));
    s
}

pub fn to_json(checks: &[Check]) -> Value {
    let rows: Vec<Value> = checks
        .iter()
        .map(|c| json!({"name": c.name, "expected": c.expected, "actual": c.actual, "pass": c.pass, "ms": c.millis}))
        .collect();
    json!({"checks": rows, "passed": checks.iter().filter(|c| c.pass).count(), "total": checks.len()})
}
