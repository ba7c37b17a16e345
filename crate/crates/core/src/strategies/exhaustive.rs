use super::StrategyOutcome;
use crate::engine::{evaluate_with_rev_max, rev_max_micro, score};
use crate::model::{ApplicationModel, Configuration};

/// Best feasible configuration by full enumeration.
///
/// Among configurations within `budget_g`, returns one with the highest
/// objective, preferring lower emissions and then the lexicographically
/// smaller configuration. When nothing fits, falls back to the
/// lowest-emission configuration and flags the violation.
pub fn optimal_select(app: &ApplicationModel, users0: f64, ci: f64, budget_g: f64) -> StrategyOutcome {
    let norm = rev_max_micro(app);
    let radices: Vec<usize> = app.microservices.iter().map(|m| m.versions.len()).collect();
    let mut current = vec![0usize; radices.len()];

    // (objective, emissions, configuration) of the incumbents
    let mut best: Option<(f64, f64, Vec<usize>)> = None;
    let mut cheapest: Option<(f64, Vec<usize>)> = None;
    loop {
        let (obj, em) = score(app, &current, users0, ci, norm);
        if em <= budget_g {
            let wins = match &best {
                None => true,
                Some((bo, be, _)) => obj > *bo || (obj == *bo && em < *be),
            };
            if wins {
                best = Some((obj, em, current.clone()));
            }
        } else if best.is_none() && cheapest.as_ref().is_none_or(|(ce, _)| em < *ce) {
            cheapest = Some((em, current.clone()));
        }

        // odometer step, last microservice fastest
        let mut pos = current.len();
        loop {
            if pos == 0 {
                let chosen = best
                    .map(|(_, _, c)| c)
                    .or(cheapest.map(|(_, c)| c))
                    .expect("a valid model has at least one configuration");
                let plan = evaluate_with_rev_max(app, &Configuration(chosen), users0, ci, budget_g, norm);
                return StrategyOutcome::new(plan);
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < radices[pos] {
                break;
            }
            current[pos] = 0;
        }
    }
}
