use std::collections::VecDeque;

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Minimum-hop relay chain from `source` to `hub` where every hop spans at
/// most `range` meters. Returns the relay ids in forwarding order (empty for
/// a direct link), or `None` when the hub is unreachable. Among equally
/// short chains the one through lower relay ids wins.
pub fn route_multihop(
    source: (f64, f64),
    hub: (f64, f64),
    relays: &[(u32, (f64, f64))],
    range: f64,
) -> Option<Vec<u32>> {
    if distance(source, hub) <= range {
        return Some(Vec::new());
    }
    let mut order: Vec<usize> = (0..relays.len()).collect();
    order.sort_by_key(|&i| relays[i].0);
    let mut parent: Vec<Option<usize>> = vec![None; relays.len()];
    let mut seen = vec![false; relays.len()];
    let mut queue = VecDeque::new();
    for &i in &order {
        if distance(source, relays[i].1) <= range {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        if distance(relays[i].1, hub) <= range {
            let mut chain = vec![relays[i].0];
            let mut at = i;
            while let Some(p) = parent[at] {
                chain.push(relays[p].0);
                at = p;
            }
            chain.reverse();
            return Some(chain);
        }
        for &j in &order {
            if !seen[j] && distance(relays[i].1, relays[j].1) <= range {
                seen[j] = true;
                parent[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_link() {
        assert_eq!(
            route_multihop((0.0, 0.0), (100.0, 0.0), &[], 150.0),
            Some(vec![])
        );
    }

    #[test]
    fn picks_fewest_hops() {
        let relays = [
            (10, (300.0, 0.0)),
            (11, (600.0, 0.0)),
            (12, (900.0, 0.0)),
            (13, (500.0, 0.0)),
        ];
        // 0 -> 13 -> hub (1000) needs range 500
        assert_eq!(
            route_multihop((0.0, 0.0), (1000.0, 0.0), &relays, 500.0),
            Some(vec![13])
        );
        assert_eq!(
            route_multihop((0.0, 0.0), (1000.0, 0.0), &relays, 350.0),
            Some(vec![10, 11, 12])
        );
        assert_eq!(
            route_multihop((0.0, 0.0), (1000.0, 0.0), &relays, 200.0),
            None
        );
    }
}
