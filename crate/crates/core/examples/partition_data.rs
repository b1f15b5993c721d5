//! Non-IID splits of the synthetic task: sort-and-partition with an
//! imbalance ratio, and Dirichlet mixes at several concentrations.

use fedcgd::datagen::{dirichlet_partition, gen_synthetic, sort_and_partition, Partition, TaskConfig};
use fedcgd::rng::{stream, Stream};

fn describe(name: &str, partition: &Partition) -> fedcgd::Result<()> {
    let global = partition.global_dist()?;
    let mean_gap = partition
        .devices
        .iter()
        .map(|d| d.label_dist.l1_distance(&global))
        .sum::<f64>()
        / partition.devices.len() as f64;
    let sizes: Vec<usize> = partition.devices.iter().map(|d| d.size()).collect();
    println!(
        "{name:<22} devices={} sizes {}..{} dropped={} mean |p_v - p|_1={:.3}",
        sizes.len(),
        sizes.iter().min().unwrap(),
        sizes.iter().max().unwrap(),
        partition.dropped,
        mean_gap
    );
    let mix: Vec<String> = global.probs().iter().map(|p| format!("{p:.3}")).collect();
    println!("{:<22} pooled mix [{}]", "", mix.join(", "));
    Ok(())
}

fn main() -> fedcgd::Result<()> {
    let seed = 0;
    let task = TaskConfig::default().build(&mut stream(seed, Stream::TaskMeans, 0, 0))?;
    let (train, test) = gen_synthetic(&task, &mut stream(seed, Stream::Samples, 0, 0))?;
    println!("train {} samples, test {} samples, {} classes", train.len(), test.len(), task.num_classes);

    for r in [1.0, 3.0, 9.0] {
        let mut rng = stream(seed, Stream::Partition, 0, 0);
        let p = sort_and_partition(&train, 32, 1, r, &mut rng)?;
        describe(&format!("sort-and-partition r={r}"), &p)?;
    }
    for alpha in [0.1, 1.0, 10.0] {
        let mut rng = stream(seed, Stream::Partition, 0, 0);
        let p = dirichlet_partition(&train, 32, alpha, None, &mut rng)?;
        describe(&format!("dirichlet alpha={alpha}"), &p)?;
    }
    Ok(())
}
