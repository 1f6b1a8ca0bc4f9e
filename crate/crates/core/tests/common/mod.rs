#![allow(dead_code)]

use gmis_core::{generate, GenSpec, Instance, ShapeKind};

/// Seeded pseudo-disk corpus: 200 instances, disks and squares
/// alternating, `n` cycling through 6..=18, density 2.0..=4.0.
pub fn pseudo_disk_spec(k: u64) -> GenSpec {
    GenSpec {
        kind: if k.is_multiple_of(2) { ShapeKind::Disks } else { ShapeKind::Squares },
        n: 6 + (k % 13) as usize,
        density: 2.0 + (k % 5) as f64 * 0.5,
        seed: 1000 + k,
        unit_weights: false,
    }
}

pub fn pseudo_disk_corpus() -> Vec<Instance> {
    (0..200).map(|k| generate(&pseudo_disk_spec(k)).unwrap()).collect()
}

pub fn large_pseudo_disk(k: u64) -> Instance {
    generate(&GenSpec {
        kind: if k.is_multiple_of(2) { ShapeKind::Disks } else { ShapeKind::Squares },
        n: 100,
        density: 3.0,
        seed: 2000 + k,
        unit_weights: false,
    })
    .unwrap()
}

pub fn unit_pseudo_disk(k: u64) -> Instance {
    generate(&GenSpec {
        kind: if k.is_multiple_of(2) { ShapeKind::Disks } else { ShapeKind::Squares },
        n: 10 + (k % 21) as usize,
        density: 2.0 + (k % 3) as f64,
        seed: 3000 + k,
        unit_weights: true,
    })
    .unwrap()
}

pub fn rect_instance(k: u64, n: usize) -> Instance {
    generate(&GenSpec {
        kind: ShapeKind::Rects,
        n,
        density: 3.0,
        seed: 5000 + k,
        unit_weights: false,
    })
    .unwrap()
}
