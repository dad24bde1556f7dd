//! Structural checks on produced traces.

use crate::hybrid::{EventKind, Layout, NetworkConfig, Trace};

/// Hybrid time domain: `(t, j)` nondecreasing, `j` steps by one per jump
/// and stays put along flows.
pub fn check_time_domain(trace: &Trace) -> Vec<String> {
    let mut out = Vec::new();
    for (k, w) in trace.records.windows(2).enumerate() {
        let (a, b) = (&w[0], &w[1]);
        if b.t < a.t || (b.t == a.t && b.j < a.j) {
            out.push(format!("record {}: (t, j) decreased", k + 1));
        }
        let expect = if b.kind == EventKind::FlowSample {
            a.j
        } else {
            a.j + 1
        };
        if b.j != expect {
            out.push(format!("record {}: j = {} expected {expect}", k + 1, b.j));
        }
    }
    out
}

/// Sampling spacing in `[ε, T]`, each update within `Δ` of its sampling
/// and before the next one, samplings and updates alternating.
pub fn check_spacing(trace: &Trace, networks: &[NetworkConfig]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, net) in networks.iter().enumerate() {
        let tol = net.time_tol();
        let mut last_sample = 0.0;
        let mut in_flight = false;
        for r in trace.jumps().filter(|r| r.network == Some(i)) {
            match r.kind {
                EventKind::Sample => {
                    if in_flight {
                        out.push(format!("network {i}: sampling at t = {} before arrival", r.t));
                    }
                    let gap = r.t - last_sample;
                    if gap < net.eps_min - tol || gap > net.masp + tol {
                        out.push(format!("network {i}: sampling gap {gap} at t = {}", r.t));
                    }
                    last_sample = r.t;
                    in_flight = true;
                }
                EventKind::Update => {
                    if !in_flight {
                        out.push(format!("network {i}: update at t = {} without packet", r.t));
                    }
                    let d = r.t - last_sample;
                    if !(-tol..=net.mad + tol).contains(&d) {
                        out.push(format!("network {i}: delay {d} at t = {}", r.t));
                    }
                    in_flight = false;
                }
                EventKind::FlowSample => {}
            }
        }
    }
    out
}

/// A jump of network `i` changes nothing that belongs to another network,
/// nor `x` or the clocks `δ`; `b_i` flips and `κ_i` counts triggers.
/// Needs snapshots; records without one are skipped.
pub fn check_locality(trace: &Trace, layout: &Layout) -> Vec<String> {
    let mut out = Vec::new();
    for r in trace.jumps() {
        let (Some(i), Some(s)) = (r.network, r.snapshot.as_ref()) else {
            continue;
        };
        let (pre, post) = (&s.pre, &s.post);
        let at = format!("t = {}, j = {}", r.t, r.j);
        if pre.x != post.x || pre.delta != post.delta {
            out.push(format!("{at}: x or delta changed at a jump"));
        }
        for k in (0..layout.networks()).filter(|&k| k != i) {
            let er = layout.e[k].clone();
            let nr = layout.mu[k].clone();
            if pre.e[er.clone()] != post.e[er.clone()]
                || pre.m[er.clone()] != post.m[er]
                || pre.mu[nr.clone()] != post.mu[nr]
                || pre.tau[k] != post.tau[k]
                || pre.kappa[k] != post.kappa[k]
                || pre.b[k] != post.b[k]
                || pre.triggered[k] != post.triggered[k]
            {
                out.push(format!("{at}: jump of network {i} touched network {k}"));
            }
        }
        match r.kind {
            EventKind::Sample => {
                if pre.b[i] || !post.b[i] {
                    out.push(format!("{at}: sampling did not flip b 0 -> 1"));
                }
                let dk = post.kappa[i] - pre.kappa[i];
                if dk != u64::from(r.triggered == Some(true)) {
                    out.push(format!("{at}: kappa step {dk} disagrees with trigger"));
                }
            }
            EventKind::Update => {
                if !pre.b[i] || post.b[i] || pre.kappa[i] != post.kappa[i] {
                    out.push(format!("{at}: update did not flip b 1 -> 0 or moved kappa"));
                }
            }
            EventKind::FlowSample => {}
        }
    }
    out
}

/// All structural checks.
pub fn check_trace(trace: &Trace, networks: &[NetworkConfig], layout: &Layout) -> Vec<String> {
    let mut out = check_time_domain(trace);
    out.extend(check_spacing(trace, networks));
    out.extend(check_locality(trace, layout));
    out
}
