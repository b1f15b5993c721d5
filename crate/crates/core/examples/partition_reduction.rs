//! Size-constrained partition instances mapped to scheduling: the oracle
//! reaches objective zero on the WEMD part exactly when a size-s subset sums
//! to half the total.

use fedcgd::objective::{group_distribution, wemd};
use fedcgd::schedulers::{brute_force, has_partition_of_size, reduce_partition};

fn main() -> fedcgd::Result<()> {
    let cases: [(&[u64], usize); 4] = [
        (&[1, 2, 3, 4], 2),
        (&[1, 1, 1, 5], 2),
        (&[3, 1, 1, 2, 2, 1], 3),
        (&[2, 2, 2, 2, 7, 1], 2),
    ];
    for (ints, s) in cases {
        let instance = reduce_partition(ints, s)?;
        let report = brute_force(&instance)?;
        let members = &report.schedule.members;
        let group = group_distribution(members, &instance.device_dists)?;
        let w = wemd(&group, &instance.global_dist, &instance.params.class_weights)?;
        println!(
            "{:?} s={} partition={} oracle={:?} wemd={:.3e}",
            ints,
            s,
            has_partition_of_size(ints, s),
            members,
            w
        );
    }
    Ok(())
}
