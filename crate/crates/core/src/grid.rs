//! Cached Chebyshev-distributed point sets on [-1, 1].

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::scalar::{precision_bits, Scalar};

type GridCache = Mutex<HashMap<(usize, u32), Arc<Vec<Scalar>>>>;

fn cache() -> &'static GridCache {
    static CACHE: OnceLock<GridCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The `count` Chebyshev extrema `-cos(j*pi/(count-1))`, ascending.
///
/// The set is exactly symmetric: `x[count-1-j] == -x[j]`, the ends are exactly
/// `-1` and `1`, and an odd count puts an exact `0` in the middle.
pub fn chebyshev_extrema(count: usize) -> Arc<Vec<Scalar>> {
    assert!(count >= 2, "a Chebyshev grid needs at least two points");
    let key = (count, precision_bits());
    if let Some(g) = cache().lock().unwrap().get(&key) {
        return Arc::clone(g);
    }
    let grid = Arc::new(build(count));
    cache()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert_with(|| Arc::clone(&grid));
    grid
}

fn build(count: usize) -> Vec<Scalar> {
    let last = count - 1;
    let step = Scalar::pi() / last as i64;
    let mut pts = vec![Scalar::zero(); count];
    for j in 0..count / 2 {
        let x = -(&step * j as i64).cos();
        pts[last - j] = -&x;
        pts[j] = x;
    }
    pts[0] = Scalar::from_i64(-1);
    pts[last] = Scalar::one();
    pts
}

/// Chebyshev extrema with an odd point count, so `0` is a member.
pub fn chebyshev_extrema_with_zero(min_count: usize) -> Arc<Vec<Scalar>> {
    let count = if min_count % 2 == 0 { min_count + 1 } else { min_count };
    chebyshev_extrema(count.max(3))
}
