//! Sampling against an exact enumeration of every (seed, width) outcome.

use parcelsense::geodata::{build_parcel_records, ParcelMap, ParcelRecord};
use parcelsense::sampler::{is_valid_window, sample_all, sample_windows, MembershipIndex, SampleWindow, SamplerConfig};
use proptest::prelude::*;

/// Builds a `w x h` map where `f(x, y)` gives the id of each pixel.
fn map_from(w: usize, h: usize, f: impl Fn(usize, usize) -> u32) -> ParcelMap {
    let ids = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| f(x, y))
        .collect();
    ParcelMap::new(w, h, ids).unwrap()
}

fn record(map: &ParcelMap, id: u32) -> ParcelRecord {
    build_parcel_records(map, None)
        .records
        .into_iter()
        .find(|r| r.id == id)
        .unwrap()
}

/// Brute-force pixel count; windows leaving the raster are invalid.
fn valid(map: &ParcelMap, id: u32, x: usize, y: usize, w: usize, threshold: f64) -> bool {
    if x + w > map.width() || y + w > map.height() {
        return false;
    }
    let mut n = 0;
    for yy in y..y + w {
        for xx in x..x + w {
            n += (map.id_at(xx, yy) == id) as usize;
        }
    }
    n as f64 > threshold * (w * w) as f64
}

/// Exact probability that one draw is valid: seeds are uniform over the
/// bounding box, `l = min(x_max - x, y_max - y)`, `w = w_min` when
/// `l < w_min`, otherwise uniform over `w_min..=l`.
fn exact_probability(map: &ParcelMap, rec: &ParcelRecord, w_min: usize, threshold: f64) -> f64 {
    let b = rec.bbox;
    let seeds = ((b.x_max - b.x_min + 1) * (b.y_max - b.y_min + 1)) as f64;
    let mut p = 0.0;
    for y in b.y_min..=b.y_max {
        for x in b.x_min..=b.x_max {
            let l = (b.x_max - x).min(b.y_max - y);
            p += if l < w_min {
                valid(map, rec.id, x, y, w_min, threshold) as u8 as f64
            } else {
                let hits = (w_min..=l).filter(|&w| valid(map, rec.id, x, y, w, threshold)).count();
                hits as f64 / (l - w_min + 1) as f64
            };
        }
    }
    p / seeds
}

struct Case {
    name: &'static str,
    map: ParcelMap,
    id: u32,
    w_min: usize,
}

fn cases() -> Vec<Case> {
    vec![
        Case {
            name: "rectangle",
            map: map_from(64, 64, |x, y| ((5..35).contains(&x) && (5..25).contains(&y)) as u32),
            id: 1,
            w_min: 4,
        },
        Case {
            name: "l-shape",
            map: map_from(48, 48, |x, y| (x < 40 && y < 40 && !(x >= 20 && y >= 20)) as u32 * 2),
            id: 2,
            w_min: 5,
        },
        Case {
            name: "ring",
            map: map_from(40, 40, |x, y| {
                let inside = (4..36).contains(&x) && (4..36).contains(&y);
                let hole = (14..26).contains(&x) && (14..26).contains(&y);
                (inside && !hole) as u32 * 3
            }),
            id: 3,
            w_min: 3,
        },
        Case {
            name: "triangle",
            map: map_from(32, 32, |x, y| (x <= y) as u32 * 4),
            id: 4,
            w_min: 4,
        },
        Case {
            name: "edge-touching",
            map: map_from(30, 30, |x, y| (x >= 18 && y >= 10) as u32 * 5),
            id: 5,
            w_min: 8,
        },
        Case {
            name: "two blobs",
            map: map_from(50, 50, |x, y| {
                let a = (2..14).contains(&x) && (2..14).contains(&y);
                let b = (30..48).contains(&x) && (25..45).contains(&y);
                (a || b) as u32 * 6
            }),
            id: 6,
            w_min: 4,
        },
    ]
}

#[test]
fn valid_fraction_matches_enumeration() {
    let attempts = 100_000;
    for case in cases() {
        let rec = record(&case.map, case.id);
        let p = exact_probability(&case.map, &rec, case.w_min, 0.8);
        let cfg = SamplerConfig {
            w_min: case.w_min,
            attempts,
            membership_threshold: 0.8,
            seed: 17,
        };
        let got = sample_windows(&case.map, &rec, &cfg).len() as f64 / attempts as f64;
        let sd = (p * (1.0 - p) / attempts as f64).sqrt();
        assert!(p > 0.0 && p < 1.0, "{}: degenerate oracle p = {p}", case.name);
        assert!(
            (got - p).abs() <= 3.0 * sd,
            "{}: empirical {got}, exact {p}, sd {sd}",
            case.name
        );
    }
}

#[test]
fn one_pixel_strip_never_yields_a_window() {
    let map = map_from(64, 64, |x, y| (y == 30 && (2..62).contains(&x)) as u32);
    let rec = record(&map, 1);
    assert_eq!(exact_probability(&map, &rec, 20, 0.8), 0.0);
    let cfg = SamplerConfig {
        w_min: 20,
        attempts: 100_000,
        membership_threshold: 0.8,
        seed: 3,
    };
    assert!(sample_windows(&map, &rec, &cfg).is_empty());
}

#[test]
fn emitted_windows_are_valid_and_in_bounds() {
    for case in cases() {
        let rec = record(&case.map, case.id);
        let cfg = SamplerConfig {
            w_min: case.w_min,
            attempts: 2_000,
            membership_threshold: 0.8,
            seed: 1,
        };
        for w in sample_windows(&case.map, &rec, &cfg) {
            assert!(w.fits(case.map.width(), case.map.height()));
            assert!(is_valid_window(&case.map, case.id, &w, 0.8));
        }
    }
}

#[test]
fn thread_count_does_not_change_samples() {
    let map = map_from(64, 64, |x, y| 1 + (x / 16 + 4 * (y / 16)) as u32);
    let records = build_parcel_records(&map, None).records;
    let cfg = SamplerConfig {
        w_min: 3,
        attempts: 500,
        membership_threshold: 0.8,
        seed: 9,
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_all(&map, &records, &cfg))
    };
    assert_eq!(run(1), run(4));
}

proptest! {
    #[test]
    fn index_agrees_with_pixel_count(
        ids in prop::collection::vec(0u32..3, 16 * 16),
        x in 0usize..20, y in 0usize..20, w in 1usize..12,
        threshold in 0.05f64..1.0,
    ) {
        let map = ParcelMap::new(16, 16, ids).unwrap();
        for rec in build_parcel_records(&map, None).records {
            let index = MembershipIndex::new(&map, &rec);
            let win = SampleWindow::new(x, y, w);
            prop_assert_eq!(index.is_valid(&win, threshold), is_valid_window(&map, rec.id, &win, threshold));
            prop_assert_eq!(
                index.is_valid(&win, threshold),
                valid(&map, rec.id, x, y, w, threshold)
            );
        }
    }
}
