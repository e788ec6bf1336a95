//! Workload arithmetic for the production pipeline and recording split
//! planning. All quantities are exact rationals so the published figures
//! (2.7 h, 4.05 h, 60 min, 25 min, 30 min) come out exactly.

use std::fmt;
use std::ops::{Add, Mul, RangeInclusive};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// Renders a rational as a decimal with trailing zeros trimmed. Values that
/// do not terminate within four places are rounded half up.
fn fmt_decimal(v: Q, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let neg = v < Q::from_integer(0);
    let v = if neg { -v } else { v };
    let scaled = (v * Q::from_integer(10_000) + q(1, 2)).floor().to_integer();
    let (int, mut frac) = (scaled / 10_000, scaled % 10_000);
    let sign = if neg && scaled != 0 { "-" } else { "" };
    if frac == 0 {
        return write!(f, "{sign}{int}");
    }
    let mut digits = 4;
    while frac % 10 == 0 {
        frac /= 10;
        digits -= 1;
    }
    write!(f, "{sign}{int}.{frac:0digits$}")
}

fn parse_decimal(s: &str) -> Option<Q> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() || !ok(int) || !ok(frac) || int.len() > 9 || frac.len() > 9 {
        return None;
    }
    let den = 10i64.pow(frac.len() as u32);
    let num = int.parse::<i64>().ok()? * den + if frac.is_empty() { 0 } else { frac.parse::<i64>().ok()? };
    Some(q(num, den))
}

macro_rules! quantity {
    ($name:ident, $unit:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub Ratio<i64>);

        impl $name {
            pub fn new(numer: i64, denom: i64) -> Self {
                $name(Ratio::new(numer, denom))
            }

            pub fn zero() -> Self {
                $name(Ratio::from_integer(0))
            }

            pub fn from_integer(n: i64) -> Self {
                $name(Ratio::from_integer(n))
            }

            pub fn to_f64(self) -> f64 {
                *self.0.numer() as f64 / *self.0.denom() as f64
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt_decimal(self.0, f)
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let body = s.trim().strip_suffix($unit).unwrap_or(s.trim()).trim();
                parse_decimal(body).map($name).ok_or_else(|| format!("bad quantity `{s}`"))
            }
        }

        impl Add for $name {
            type Output = $name;

            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl Mul<Ratio<i64>> for $name {
            type Output = $name;

            fn mul(self, rhs: Ratio<i64>) -> $name {
                $name(self.0 * rhs)
            }
        }

        impl std::iter::Sum for $name {
            fn sum<I: Iterator<Item = $name>>(iter: I) -> $name {
                iter.fold($name::zero(), Add::add)
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

quantity!(Hours, "h");
quantity!(Minutes, "min");

impl Hours {
    pub fn to_minutes(self) -> Minutes {
        Minutes(self.0 * 60)
    }
}

impl Minutes {
    pub fn to_hours(self) -> Hours {
        Hours(self.0 / 60)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: String },
    #[error("part count must be at least {min}, got {got}")]
    TooFewParts { min: usize, got: usize },
    #[error("split count must be between 1 and {max}, got {got}")]
    SplitCount { max: usize, got: usize },
}

fn positive<T: fmt::Display>(what: &'static str, value: Q, shown: T) -> Result<(), DomainError> {
    if value > Q::from_integer(0) {
        Ok(())
    } else {
        Err(DomainError::NonPositive { what, value: shown.to_string() })
    }
}

/// Raw recording time for a final runtime (1.8x for retakes and pauses).
pub fn estimate_recording(final_runtime: Hours) -> Result<Hours, DomainError> {
    positive("runtime", final_runtime.0, final_runtime)?;
    Ok(final_runtime * q(9, 5))
}

/// Manual caption polishing time: every raw hour takes 1.5 hours to review.
pub fn estimate_polishing_manual(final_runtime: Hours) -> Result<Hours, DomainError> {
    positive("runtime", final_runtime.0, final_runtime)?;
    Ok(final_runtime * q(9, 5) * q(3, 2))
}

/// B-roll sourcing adds five times the part's runtime.
pub fn estimate_sourcing(part_runtime: Minutes) -> Result<Minutes, DomainError> {
    positive("part runtime", part_runtime.0, part_runtime)?;
    Ok(part_runtime * q(6, 1))
}

/// Editing adds 150% with assets ready and 200% when sourcing mid-edit.
pub fn estimate_editing(part_runtime: Minutes, broll_ready: bool) -> Result<Minutes, DomainError> {
    positive("part runtime", part_runtime.0, part_runtime)?;
    Ok(part_runtime * if broll_ready { q(5, 2) } else { q(3, 1) })
}

/// Five minutes per transition graphic, one for each of parts 2..P.
pub fn estimate_transitions(parts: usize) -> Result<Minutes, DomainError> {
    if parts < 2 {
        return Err(DomainError::TooFewParts { min: 2, got: parts });
    }
    Ok(Minutes::from_integer(5 * (parts as i64 - 1)))
}

/// Recording split label: `A`, `B`, `C`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitId(u8);

impl SplitId {
    pub const MAX: usize = 26;

    pub fn from_index(i: usize) -> Option<Self> {
        (i < Self::MAX).then_some(SplitId(i as u8))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SplitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", (b'A' + self.0) as char)
    }
}

impl FromStr for SplitId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.as_bytes() {
            [c] if c.is_ascii_alphabetic() => Ok(SplitId(c.to_ascii_uppercase() - b'A')),
            _ => Err(format!("bad split id `{s}`")),
        }
    }
}

impl Serialize for SplitId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SplitId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitPlan {
    pub id: SplitId,
    pub first_part: usize,
    pub last_part: usize,
}

impl SplitPlan {
    pub fn parts(&self) -> RangeInclusive<usize> {
        self.first_part..=self.last_part
    }

    pub fn contains(&self, part: usize) -> bool {
        self.parts().contains(&part)
    }
}

/// Cuts parts `1..=parts` into `count` contiguous ranges whose sizes differ
/// by at most one, larger ranges first.
pub fn plan_splits(parts: usize, count: usize) -> Result<Vec<SplitPlan>, DomainError> {
    if parts == 0 {
        return Err(DomainError::TooFewParts { min: 1, got: 0 });
    }
    if count == 0 || count > parts || count > SplitId::MAX {
        return Err(DomainError::SplitCount { max: parts.min(SplitId::MAX), got: count });
    }
    let (base, extra) = (parts / count, parts % count);
    let mut next = 1;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let size = base + usize::from(i < extra);
        out.push(SplitPlan { id: SplitId(i as u8), first_part: next, last_part: next + size - 1 });
        next += size;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Human,
    JuniorAgent,
    SeniorAgent,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Human => "human",
            Role::JuniorAgent => "junior agent",
            Role::SeniorAgent => "senior agent",
        })
    }
}

pub const STEP_NAMES: [&str; 12] = [
    "Topic selection",
    "Source review",
    "Script writing",
    "Recording",
    "Caption polishing",
    "Image annotation",
    "Video sourcing",
    "Asset collection",
    "Editing",
    "Transition graphics",
    "Finalization",
    "Caption export",
];

pub fn default_roles() -> [Role; 12] {
    use Role::*;
    [Human, Human, Human, Human, JuniorAgent, Human, Human, JuniorAgent, SeniorAgent, Human, Human, Human]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelinePlan {
    pub final_runtime: Hours,
    pub part_minutes: Vec<Minutes>,
    pub broll_ready: Vec<bool>,
    pub splits: Vec<SplitPlan>,
    pub senior_agents: usize,
    /// Allowance for step 11, which has no published duration.
    pub finalization: Hours,
    pub roles: [Role; 12],
}

impl PipelinePlan {
    /// Equal-length parts, all B-roll pre-sourced, one-hour finalization.
    pub fn uniform(
        final_runtime: Hours,
        parts: usize,
        split_count: usize,
        senior_agents: usize,
    ) -> Result<Self, PlanError> {
        if parts == 0 {
            return Err(PlanError::NoParts);
        }
        let part = Minutes(final_runtime.to_minutes().0 / parts as i64);
        Ok(PipelinePlan {
            final_runtime,
            part_minutes: vec![part; parts],
            broll_ready: vec![true; parts],
            splits: plan_splits(parts, split_count)?,
            senior_agents,
            finalization: Hours::from_integer(1),
            roles: default_roles(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("plan has no parts")]
    NoParts,
    #[error("part durations sum to {found} min but the runtime is {expected} min")]
    RuntimeMismatch { expected: Minutes, found: Minutes },
    #[error("broll_ready has {found} entries for {expected} parts")]
    ReadyFlags { expected: usize, found: usize },
    #[error("splits do not partition the parts in order: {0}")]
    BadSplits(String),
    #[error("at least one senior agent is required")]
    NoAgents,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineItem {
    pub step: u8,
    pub name: &'static str,
    pub role: Role,
    pub hours: Hours,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitLoad {
    pub split: SplitId,
    pub agent: usize,
    pub hours: Hours,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadEstimate {
    pub items: Vec<LineItem>,
    pub human: Hours,
    pub junior_agent: Hours,
    pub senior_agent: Hours,
    /// Senior-agent editing time with whole splits spread over the agents.
    pub senior_wall_clock: Hours,
    pub split_loads: Vec<SplitLoad>,
    /// Human hours plus the senior-agent wall clock.
    pub critical_path: Hours,
}

impl WorkloadEstimate {
    pub fn item(&self, step: u8) -> Option<&LineItem> {
        self.items.iter().find(|i| i.step == step)
    }
}

fn check_plan(plan: &PipelinePlan) -> Result<(), PlanError> {
    let parts = plan.part_minutes.len();
    if parts == 0 {
        return Err(PlanError::NoParts);
    }
    positive("runtime", plan.final_runtime.0, plan.final_runtime)?;
    let found: Minutes = plan.part_minutes.iter().copied().sum();
    if found != plan.final_runtime.to_minutes() {
        return Err(PlanError::RuntimeMismatch { expected: plan.final_runtime.to_minutes(), found });
    }
    if plan.broll_ready.len() != parts {
        return Err(PlanError::ReadyFlags { expected: parts, found: plan.broll_ready.len() });
    }
    let mut next = 1;
    for s in &plan.splits {
        if s.first_part != next || s.last_part < s.first_part {
            return Err(PlanError::BadSplits(format!(
                "split {} starts at part {}, expected {next}",
                s.id, s.first_part
            )));
        }
        next = s.last_part + 1;
    }
    if next != parts + 1 {
        return Err(PlanError::BadSplits(format!("splits end at part {}, plan has {parts}", next - 1)));
    }
    if plan.senior_agents == 0 {
        return Err(PlanError::NoAgents);
    }
    Ok(())
}

pub fn estimate_pipeline(plan: &PipelinePlan) -> Result<WorkloadEstimate, PlanError> {
    check_plan(plan)?;
    let parts = plan.part_minutes.len();
    let mut sourcing = Minutes::zero();
    let mut editing = Vec::with_capacity(parts);
    for (m, ready) in plan.part_minutes.iter().zip(&plan.broll_ready) {
        sourcing = sourcing + estimate_sourcing(*m)?;
        editing.push(estimate_editing(*m, *ready)?);
    }
    let transitions = if parts >= 2 { estimate_transitions(parts)? } else { Minutes::zero() };

    let hours: [(Hours, Option<&'static str>); 12] = [
        (Hours::zero(), Some("creative judgment, not estimated")),
        (Hours::zero(), Some("creative judgment, not estimated")),
        (Hours::zero(), Some("creative judgment, not estimated")),
        (estimate_recording(plan.final_runtime)?, None),
        (estimate_polishing_manual(plan.final_runtime)?, Some("manual baseline handed to the agent")),
        (Hours::zero(), Some("counted under video sourcing")),
        (sourcing.to_hours(), None),
        (Hours::zero(), Some("no published figure")),
        (editing.iter().copied().sum::<Minutes>().to_hours(), None),
        (transitions.to_hours(), None),
        (plan.finalization, Some("assumed allowance")),
        (Hours::zero(), Some("no published figure")),
    ];
    let items: Vec<LineItem> = hours
        .iter()
        .enumerate()
        .map(|(i, &(hours, note))| LineItem {
            step: i as u8 + 1,
            name: STEP_NAMES[i],
            role: plan.roles[i],
            hours,
            note,
        })
        .collect();
    let total = |role| items.iter().filter(|i| i.role == role).map(|i| i.hours).sum::<Hours>();
    let (human, junior_agent, senior_agent) = (total(Role::Human), total(Role::JuniorAgent), total(Role::SeniorAgent));

    // Longest split first onto the least loaded agent.
    let mut loads: Vec<(SplitId, Hours)> =
        plan.splits.iter().map(|s| (s.id, s.parts().map(|p| editing[p - 1]).sum::<Minutes>().to_hours())).collect();
    loads.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut agents = vec![Hours::zero(); plan.senior_agents];
    let mut split_loads = Vec::with_capacity(loads.len());
    for (split, h) in loads {
        let agent = (0..agents.len()).min_by_key(|&a| agents[a]).unwrap_or(0);
        agents[agent] = agents[agent] + h;
        split_loads.push(SplitLoad { split, agent: agent + 1, hours: h });
    }
    split_loads.sort_by_key(|l| l.split);
    // Editing is the only parallel senior-agent item under the default
    // mapping; anything else remapped to senior agents runs serially.
    let other_senior =
        if plan.roles[8] == Role::SeniorAgent { senior_agent.0 - items[8].hours.0 } else { senior_agent.0 };
    let wall_editing = if plan.roles[8] == Role::SeniorAgent {
        agents.iter().copied().max().unwrap_or_default()
    } else {
        Hours::zero()
    };
    let senior_wall_clock = Hours(wall_editing.0 + other_senior);

    Ok(WorkloadEstimate {
        human,
        junior_agent,
        senior_agent,
        senior_wall_clock,
        critical_path: human + senior_wall_clock,
        items,
        split_loads,
    })
}
