//! Every solver on the four-device example: two devices close to the global
//! mix and a complementary pair that averages to it exactly.

use fedcgd::objective::{ClassDistribution, ObjectiveParams};
use fedcgd::schedulers::{solve, ProblemInstance, SideInfo, SolverKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> fedcgd::Result<()> {
    let dists = [[0.51, 0.49], [0.51, 0.49], [0.8, 0.2], [0.2, 0.8]]
        .iter()
        .map(|p| ClassDistribution::new(p.to_vec()))
        .collect::<fedcgd::Result<Vec<_>>>()?;
    let side = SideInfo {
        gains: Some(vec![4.0, 3.0, 2.0, 1.0]),
        grad_norms: Some(vec![1.0, 1.0, 2.0, 2.0]),
        losses: Some(vec![0.5, 0.6, 0.9, 0.8]),
        poc_subset: None,
    };
    for (sigma, budget) in [(0.0, 2.0), (0.0, 4.0), (1.0, 4.0)] {
        let instance = ProblemInstance::new(
            dists.clone(),
            vec![Some(1.0); 4],
            ClassDistribution::uniform(2),
            ObjectiveParams::scalar(sigma, 32, 1.0, 2),
            budget,
        )?;
        println!("sigma={sigma} budget={budget}");
        for kind in SolverKind::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let report = solve(kind, &instance, &side, &mut rng)?;
            println!(
                "  {:<7} members={:?} objective={:.4} iterations={}",
                kind.to_string(),
                report.schedule.members,
                report.schedule.objective_value,
                report.iterations
            );
        }
    }
    Ok(())
}
