use crate::arrangement::{Arrangement, Line};

/// `0, 1, -1, 2, -2, ...`: distinct small integers.
fn small_values(count: usize) -> impl Iterator<Item = i64> {
    (0..count as i64).map(|k| if k % 2 == 1 { (k + 1) / 2 } else { -(k / 2) })
}

/// Two pencils sharing the line `z = 0`: `d1` lines `x = i z` through
/// `[0:1:0]` and `d2` lines `y = j z` through `[1:0:0]`. Lines from
/// different pencils meet in the distinct double points `[i:j:1]`, so
/// `b2 = (n - 1) + d1 d2` and the arrangement is supersolvable, hence free
/// with exponents `(d1, d2)`.
pub fn supersolvable_two_pencil(d1: usize, d2: usize) -> Arrangement {
    assert!(1 <= d1 && d1 <= d2, "need 1 <= d1 <= d2");
    let mut lines = vec![Line::new(0, 0, 1).unwrap()];
    lines.extend(small_values(d1).map(|i| Line::new(1, 0, -i).unwrap()));
    lines.extend(small_values(d2).map(|j| Line::new(0, 1, -j).unwrap()));
    Arrangement::new(lines).expect("two-pencil lines are distinct")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::intersection_summary;

    #[test]
    fn triangle() {
        let a = supersolvable_two_pencil(1, 1);
        assert_eq!(a.n(), 3);
        assert_eq!(intersection_summary(&a).t_m(2), 3);
    }

    #[test]
    fn profile() {
        let a = supersolvable_two_pencil(3, 5);
        let s = intersection_summary(&a);
        assert_eq!(s.t_m(4), 1);
        assert_eq!(s.t_m(6), 1);
        assert_eq!(s.t_m(2), 15);
        assert_eq!(s.b2, 8 + 15);
    }

    #[test]
    fn small_values_are_distinct() {
        let v: Vec<i64> = small_values(6).collect();
        assert_eq!(v, vec![0, 1, -1, 2, -2, 3]);
    }
}
