//! Ruge-Stuben style coarse/fine splitting (serial, two passes).

use super::strength::StrengthGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfType {
    Coarse,
    Fine,
}

/// First pass: greedy selection by descending influence count (number of
/// points a candidate strongly influences), ties broken by lowest index.
/// Second pass: every strong F-F pair must share a coarse interpolatory
/// point; offenders are promoted to C.
pub fn cf_split(s: &StrengthGraph) -> Vec<CfType> {
    let n = s.n();
    let mut marker: Vec<Option<CfType>> = vec![None; n];
    let s_t = s.transpose_lists();

    // buckets[lambda] holds unassigned points with that influence measure,
    // ordered by index so the lowest index wins ties deterministically
    let mut lambda: Vec<usize> = s_t.iter().map(|deps| deps.len()).collect();
    let max_l = lambda.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<std::collections::BTreeSet<usize>> =
        vec![std::collections::BTreeSet::new(); max_l + 1];
    for (i, &l) in lambda.iter().enumerate() {
        buckets[l].insert(i);
    }
    let mut top = max_l;

    let bump = |buckets: &mut Vec<std::collections::BTreeSet<usize>>,
                    lambda: &mut Vec<usize>,
                    top: &mut usize,
                    k: usize| {
        let old = lambda[k];
        buckets[old].remove(&k);
        lambda[k] = old + 1;
        if lambda[k] >= buckets.len() {
            buckets.resize(lambda[k] + 1, std::collections::BTreeSet::new());
        }
        buckets[lambda[k]].insert(k);
        if lambda[k] > *top {
            *top = lambda[k];
        }
    };

    let mut assigned = 0usize;
    while assigned < n {
        while top > 0 && buckets[top].is_empty() {
            top -= 1;
        }
        let i = match buckets[top].iter().next() {
            Some(&i) => i,
            None => break,
        };
        buckets[top].remove(&i);
        marker[i] = Some(CfType::Coarse);
        assigned += 1;
        for &dep in &s_t[i] {
            if marker[dep].is_none() {
                buckets[lambda[dep]].remove(&dep);
                marker[dep] = Some(CfType::Fine);
                assigned += 1;
                // points the new F point depends on become more attractive
                for &k in s.neighbors(dep) {
                    if marker[k].is_none() {
                        bump(&mut buckets, &mut lambda, &mut top, k);
                    }
                }
            }
        }
    }

    let mut cf: Vec<CfType> = marker.into_iter().map(|m| m.unwrap()).collect();

    // second pass
    for i in 0..n {
        if cf[i] != CfType::Fine {
            continue;
        }
        let mut tentative: Option<usize> = None;
        let strong = s.neighbors(i);
        for &j in strong {
            if cf[j] != CfType::Fine || tentative == Some(j) {
                continue;
            }
            // does some point of C_i (including the tentative one) strongly
            // influence j?
            let mut common = false;
            for &k in s.neighbors(j) {
                if (cf[k] == CfType::Coarse || tentative == Some(k))
                    && strong.binary_search(&k).is_ok()
                {
                    common = true;
                    break;
                }
            }
            if common {
                continue;
            }
            match tentative {
                None => tentative = Some(j),
                Some(_) => {
                    // two offending neighbors: make i coarse instead
                    tentative = None;
                    cf[i] = CfType::Coarse;
                    break;
                }
            }
        }
        if let Some(j) = tentative {
            cf[j] = CfType::Coarse;
        }
    }

    cf
}

pub fn coarse_count(cf: &[CfType]) -> usize {
    cf.iter().filter(|&&t| t == CfType::Coarse).count()
}
