use framepick::spatial::{kernel_weights, resolve_neighbors};
use framepick::{Kernel, NeighborhoodSpec};
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = Kernel> {
    prop_oneof![
        Just(Kernel::Average),
        Just(Kernel::Median),
        (0.05f64..4.0).prop_map(|sigma| Kernel::Gaussian { sigma }),
        (0.5f64..4.0).prop_map(|radius| Kernel::Disk { radius }),
    ]
}

#[test]
fn gaussian_weights_follow_the_formula() {
    let sigma = 0.5;
    let w = kernel_weights(&NeighborhoodSpec::new(Kernel::Gaussian { sigma }, 3)).unwrap();
    let raw = |r2: f64| (-r2 / (2.0 * sigma * sigma)).exp();
    let total = raw(0.0) + 4.0 * raw(1.0) + 4.0 * raw(2.0);
    for (&(dr, dc), &v) in w.offsets.iter().zip(&w.weights) {
        let want = raw((dr * dr + dc * dc) as f64) / total;
        assert!((v - want).abs() < 1e-15);
    }
}

#[test]
fn disk_counts() {
    let w = kernel_weights(&NeighborhoodSpec::new(Kernel::Disk { radius: 2.0 }, 5)).unwrap();
    // offsets with dr^2 + dc^2 <= 4 in a 5x5 window
    let count = (-2i32..=2)
        .flat_map(|a| (-2i32..=2).map(move |b| a * a + b * b))
        .filter(|&r2| r2 <= 4)
        .count();
    assert_eq!(w.len(), count);
    assert!(w
        .weights
        .iter()
        .all(|&x| (x - 1.0 / count as f64).abs() < 1e-15));
}

#[test]
fn edge_spot_of_a_strip() {
    let spec = NeighborhoodSpec::new(Kernel::Average, 3);
    let (coords, w) = resolve_neighbors((0, 3), (1, 10), None, &spec).unwrap();
    assert_eq!(coords, vec![(0, 2), (0, 3), (0, 4)]);
    assert!(w.weights.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
}

#[test]
fn center_outside_grid_is_rejected() {
    let spec = NeighborhoodSpec::default();
    assert!(resolve_neighbors((3, 0), (3, 3), None, &spec).is_err());
}

proptest! {
    #[test]
    fn weights_sum_to_one(
        k in kernel(),
        half in 0usize..4,
        rows in 1usize..8,
        cols in 1usize..8,
        seed in any::<u64>(),
        holes in prop::collection::vec(any::<bool>(), 64),
    ) {
        let spec = NeighborhoodSpec::new(k, 2 * half + 1);
        let r = (seed as usize) % rows;
        let c = (seed as usize / 7) % cols;
        let occ: Vec<bool> = (0..rows * cols).map(|i| holes[i % 64] || i == r * cols + c).collect();
        let (coords, w) = resolve_neighbors((r, c), (rows, cols), Some(&occ), &spec).unwrap();
        prop_assert!((w.total() - 1.0).abs() < 1e-12);
        prop_assert!(coords.contains(&(r, c)));
        prop_assert_eq!(coords.len(), w.len());
        for &(nr, nc) in &coords {
            prop_assert!(occ[nr * cols + nc]);
        }
    }

    #[test]
    fn mirrored_centers_mirror_neighbors(
        k in kernel(),
        half in 0usize..3,
        rows in 1usize..9,
        cols in 1usize..9,
        seed in any::<u64>(),
    ) {
        let spec = NeighborhoodSpec::new(k, 2 * half + 1);
        let r = (seed as usize) % rows;
        let c = (seed as usize / 11) % cols;
        let (a, wa) = resolve_neighbors((r, c), (rows, cols), None, &spec).unwrap();
        let (b, wb) = resolve_neighbors((rows - 1 - r, cols - 1 - c), (rows, cols), None, &spec).unwrap();
        let mut mirrored: Vec<((usize, usize), u64)> = a
            .iter()
            .zip(&wa.weights)
            .map(|(&(x, y), w)| ((rows - 1 - x, cols - 1 - y), (w * 1e12).round() as u64))
            .collect();
        let mut other: Vec<((usize, usize), u64)> = b
            .iter()
            .zip(&wb.weights)
            .map(|(&p, w)| (p, (w * 1e12).round() as u64))
            .collect();
        mirrored.sort_unstable();
        other.sort_unstable();
        prop_assert_eq!(mirrored, other);
    }
}
