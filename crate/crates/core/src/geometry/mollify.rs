use super::{BoundaryProfile, GeometryError, Point};

/// Chords used to sample each circular arc.
const CHORDS_PER_ARC: usize = 16;

/// Sequence of corner-rounded profiles `h_j ≥ h` with radii `ρ_j = ρ₀·2^{−j}`.
///
/// Interior corners are rounded; the two feet at `x = 0` and `x = d` stay sharp
/// so every member keeps `supp h_j = [0, d]`. Valleys get a tangent fillet of
/// radius `ρ_j`. Peaks get a cap of radius `ρ_j` centred on the apex joined to
/// both segments by concave-up shoulder arcs, which keeps the member above `h`.
#[derive(Debug, Clone)]
pub struct MollifiedFamily {
    pub base: BoundaryProfile,
    pub members: Vec<BoundaryProfile>,
    pub radii: Vec<f64>,
}

impl MollifiedFamily {
    /// Builds members `j = 0..=j_max`.
    pub fn new(profile: &BoundaryProfile, j_max: usize, rho0: f64) -> Result<Self, GeometryError> {
        let shortest = profile.shortest_segment();
        if !(rho0 > 0.0) || rho0 >= 0.5 * shortest {
            return Err(GeometryError::RadiusTooLarge { radius: rho0, segment: shortest });
        }
        let mut members = Vec::with_capacity(j_max + 1);
        let mut radii = Vec::with_capacity(j_max + 1);
        for j in 0..=j_max {
            let rho = rho0 * 0.5f64.powi(j as i32);
            members.push(round_corners(profile, rho)?);
            radii.push(rho);
        }
        Ok(Self { base: profile.clone(), members, radii })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `sup |h_j − h|`, exact for polylines (attained at a breakpoint of either).
    pub fn max_deviation(&self, j: usize) -> f64 {
        max_deviation(&self.base, &self.members[j])
    }
}

/// Supremum of `|a − b|` for two piecewise-linear profiles.
pub fn max_deviation(a: &BoundaryProfile, b: &BoundaryProfile) -> f64 {
    a.breakpoints()
        .iter()
        .chain(b.breakpoints())
        .map(|p| (a.height(p.x) - b.height(p.x)).abs())
        .fold(0.0, f64::max)
}

fn angle(v: Point) -> f64 {
    v.y.atan2(v.x)
}

/// Points on a circle for angles strictly after `from` up to and including `to`.
fn arc(centre: Point, radius: f64, from: f64, to: f64, out: &mut Vec<Point>) {
    for k in 1..=CHORDS_PER_ARC {
        let a = from + (to - from) * k as f64 / CHORDS_PER_ARC as f64;
        out.push(centre + Point::new(a.cos(), a.sin()) * radius);
    }
}

/// Replacement polyline for the corner at `apex`, from the first tangent point
/// to the last, plus the distance `t` the rounding eats into each segment.
fn corner_points(apex: Point, d1: Point, d2: Point, rho: f64) -> Result<(Vec<Point>, f64), GeometryError> {
    let n1 = d1.left_normal();
    let n2 = d2.left_normal();
    let turn = d1.cross(d2);
    if turn > 0.0 {
        // Valley: inscribed fillet lies above both lines.
        let phi = turn.atan2(d1.dot(d2));
        let t = rho * (0.5 * phi).tan();
        let t1 = apex - d1 * t;
        let centre = t1 + n1 * rho;
        let mut pts = vec![t1];
        arc(centre, rho, angle(-n1), angle(-n2), &mut pts);
        return Ok((pts, t));
    }
    // Peak: grow the shoulder radius until the rounding is a graph above h.
    let mut lambda = 1.0;
    for _ in 0..60 {
        let r = lambda * rho;
        let t = (rho * rho + 2.0 * rho * r).sqrt();
        let t1 = apex - d1 * t;
        let t2 = apex + d2 * t;
        let c1 = t1 + n1 * r;
        let c2 = t2 + n2 * r;
        let a1 = angle(c1 - apex);
        let a2 = angle(c2 - apex);
        if (c1 - apex).y > 0.0 && (c2 - apex).y > 0.0 && a1 > a2 {
            let mut pts = vec![t1];
            arc(c1, r, angle(-n1), angle(apex - c1), &mut pts);
            arc(apex, rho, a1, a2, &mut pts);
            arc(c2, r, angle(apex - c2), angle(-n2), &mut pts);
            let graph = pts.windows(2).all(|w| w[1].x > w[0].x);
            let above = pts.iter().all(|p| p.y >= apex.y + (p.x - apex.x) * if p.x < apex.x { d1.y / d1.x } else { d2.y / d2.x });
            if graph && above {
                return Ok((pts, t));
            }
        }
        lambda *= 1.5;
    }
    Err(GeometryError::CornerTooSharp(apex.x))
}

fn round_corners(profile: &BoundaryProfile, rho: f64) -> Result<BoundaryProfile, GeometryError> {
    let bp = profile.breakpoints();
    let n = bp.len();
    let mut roundings: Vec<Option<(Vec<Point>, f64)>> = vec![None; n];
    for i in 1..n - 1 {
        if !profile.is_corner(i) {
            continue;
        }
        let d1 = (bp[i] - bp[i - 1]).normalized();
        let d2 = (bp[i + 1] - bp[i]).normalized();
        roundings[i] = Some(corner_points(bp[i], d1, d2, rho)?);
    }
    for s in 0..n - 1 {
        let len = bp[s].distance(bp[s + 1]);
        let used: f64 = [s, s + 1]
            .iter()
            .filter_map(|&i| roundings[i].as_ref().map(|r| r.1))
            .sum();
        if used >= len {
            return Err(GeometryError::RadiusTooLarge { radius: rho, segment: len });
        }
    }
    let mut points = vec![bp[0]];
    for (i, r) in roundings.iter().enumerate().skip(1) {
        match r {
            Some((pts, _)) => points.extend_from_slice(pts),
            None => points.push(bp[i]),
        }
    }
    let last = n - 1;
    // Pin the feet exactly so the endpoint invariants hold bit-for-bit.
    points[0] = Point::new(0.0, 0.0);
    let tail = points.len() - 1;
    points[tail] = Point::new(bp[last].x, 0.0);
    if let Some(w) = points.windows(2).find(|w| w[1].x <= w[0].x) {
        return Err(GeometryError::CornerTooSharp(w[0].x));
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    let member = BoundaryProfile::new(&pairs)?;
    debug_assert!(bp.iter().all(|p| member.height(p.x) >= p.y - 1e-12));
    Ok(member)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> BoundaryProfile {
        BoundaryProfile::new(&[(0.0, 0.0), (0.5, 0.2), (1.0, 0.0)]).unwrap()
    }

    fn check_above(base: &BoundaryProfile, member: &BoundaryProfile) {
        let d = base.support_length();
        for i in 0..=10_000 {
            let x = d * i as f64 / 10_000.0;
            assert!(member.height(x) >= base.height(x) - 1e-15, "h_j < h at x = {x}");
        }
    }

    #[test]
    fn flat_profile_unchanged() {
        let flat = BoundaryProfile::flat(1.0).unwrap();
        let fam = MollifiedFamily::new(&flat, 3, 0.05).unwrap();
        assert!(fam.members.iter().all(|m| *m == flat));
    }

    #[test]
    fn apex_deviation_bound() {
        let fam = MollifiedFamily::new(&triangle(), 0, 0.05).unwrap();
        let bound = 0.05 / 0.4f64.atan().cos();
        let sup = fam.max_deviation(0);
        assert!(sup <= bound, "{sup} > {bound}");
        // Dense sampling agrees with the breakpoint supremum.
        let dense = (0..=100_000)
            .map(|i| {
                let x = i as f64 / 100_000.0;
                (fam.members[0].height(x) - fam.base.height(x)).abs()
            })
            .fold(0.0, f64::max);
        assert!(dense <= sup + 1e-15);
        assert!(sup > 0.05);
    }

    #[test]
    fn deviation_halves_and_stays_above() {
        let base = BoundaryProfile::new(&[(0.0, 0.0), (0.2, 0.3), (0.45, 0.1), (0.7, 0.25), (1.0, 0.0)]).unwrap();
        for p in [triangle(), base] {
            let fam = MollifiedFamily::new(&p, 4, 0.05).unwrap();
            for j in 0..fam.len() {
                check_above(&p, &fam.members[j]);
                assert_eq!(fam.members[j].support_length(), p.support_length());
            }
            for j in 0..fam.len() - 1 {
                let ratio = fam.max_deviation(j + 1) / fam.max_deviation(j);
                assert!((ratio - 0.5).abs() <= 0.005, "ratio {ratio}");
                assert!(fam.max_deviation(j + 1) < fam.max_deviation(j));
            }
        }
    }

    #[test]
    fn arcs_have_enough_samples() {
        let fam = MollifiedFamily::new(&triangle(), 1, 0.05).unwrap();
        // Cap plus two shoulders, each with 16 chords.
        assert!(fam.members[0].breakpoints().len() >= 2 + 3 * CHORDS_PER_ARC);
    }

    #[test]
    fn steep_peak_still_graph() {
        let p = BoundaryProfile::new(&[(0.0, 0.0), (0.5, 2.0), (1.0, 0.0)]).unwrap();
        let fam = MollifiedFamily::new(&p, 2, 0.05).unwrap();
        for m in &fam.members {
            check_above(&p, m);
        }
    }

    #[test]
    fn radius_too_large() {
        assert!(matches!(
            MollifiedFamily::new(&triangle(), 2, 0.3),
            Err(GeometryError::RadiusTooLarge { .. })
        ));
    }
}
