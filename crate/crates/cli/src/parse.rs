//! Value parsers for command-line arguments.

/// Angle in turns. `5deg` is five degrees; a bare number is already in turns.
pub fn angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (number, per_turn) = match s.strip_suffix("deg") {
        Some(rest) => (rest.trim(), 360.0),
        None => (s, 1.0),
    };
    let v: f64 = number.parse().map_err(|_| format!("not an angle: {s:?} (use turns or e.g. 5deg)"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("angle must be finite and non-negative, got {s:?}"));
    }
    Ok(v / per_turn)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tau {
    Auto,
    Fixed(f64),
}

pub fn tau(s: &str) -> Result<Tau, String> {
    if s == "auto" {
        return Ok(Tau::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Tau::Fixed(v)),
        _ => Err(format!("tau must be `auto` or a positive number, got {s:?}")),
    }
}

/// Inclusive grid `start:stop:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Scan {
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

pub fn scan(s: &str) -> Result<Scan, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("scan must look like start:stop:step, got {s:?}"));
    };
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number {x:?} in scan {s:?}"));
    let scan = Scan {
        start: num(a)?,
        stop: num(b)?,
        step: num(c)?,
    };
    if !(scan.start > 0.0 && scan.stop >= scan.start && scan.step > 0.0) {
        return Err(format!("scan needs 0 < start <= stop and step > 0, got {s:?}"));
    }
    if (scan.stop - scan.start) / scan.step > 1e6 {
        return Err(format!("scan {s:?} has too many points"));
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(angle("5deg").unwrap(), 5.0 / 360.0);
        assert_eq!(angle("0.01").unwrap(), 0.01);
        assert_eq!(angle(" 90 deg").unwrap(), 0.25);
        assert!(angle("five").is_err());
        assert!(angle("-1deg").is_err());
    }

    #[test]
    fn taus() {
        assert_eq!(tau("auto").unwrap(), Tau::Auto);
        assert_eq!(tau("1.5").unwrap(), Tau::Fixed(1.5));
        assert!(tau("0").is_err());
        assert!(tau("soon").is_err());
    }

    #[test]
    fn scans() {
        let s = scan("1:30:0.5").unwrap();
        let p = s.points();
        assert_eq!(p.len(), 59);
        assert_eq!(p[0], 1.0);
        assert_eq!(*p.last().unwrap(), 30.0);
        assert_eq!(scan("2:2:1").unwrap().points(), vec![2.0]);
        assert!(scan("1:30").is_err());
        assert!(scan("3:1:1").is_err());
        assert!(scan("1:3:0").is_err());
    }
}
