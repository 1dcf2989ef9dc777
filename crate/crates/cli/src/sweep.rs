use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

/// `start:stop:points[:log|linear]`, log spacing by default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let s = i as f64 / n;
                if i + 1 == self.points {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Log => self.start * (self.stop / self.start).powf(s),
                    Spacing::Linear => self.start + (self.stop - self.start) * s,
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(format!("sweep '{s}' is not start:stop:points[:log|linear]"));
        }
        let num = |p: &str| p.parse::<f64>().map_err(|e| format!("sweep '{s}': {p}: {e}"));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let points: usize = parts[2].parse().map_err(|e| format!("sweep '{s}': {}: {e}", parts[2]))?;
        let spacing = match parts.get(3).copied().unwrap_or("log") {
            "log" => Spacing::Log,
            "linear" | "lin" => Spacing::Linear,
            other => return Err(format!("sweep '{s}': unknown spacing '{other}'")),
        };
        if !(start.is_finite() && stop.is_finite()) || stop < start {
            return Err(format!("sweep '{s}': need finite start <= stop"));
        }
        if spacing == Spacing::Log && !(start > 0.0) {
            return Err(format!("sweep '{s}': log spacing needs start > 0"));
        }
        if points == 0 {
            return Err(format!("sweep '{s}': points must be positive"));
        }
        Ok(Self {
            start,
            stop,
            points,
            spacing,
        })
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sp = match self.spacing {
            Spacing::Log => "log",
            Spacing::Linear => "linear",
        };
        write!(f, "{}:{}:{}:{sp}", self.start, self.stop, self.points)
    }
}
