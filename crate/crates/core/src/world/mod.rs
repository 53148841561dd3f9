//! Scenario model: workspace, regions of interest, robots and objects, grasp
//! configurations and the entities they induce.

mod friction;
mod packing;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::control::ControlParams;
use crate::geom::{Disk, Point};

pub use friction::{Friction, FrictionKind};
pub use packing::{pack_spheres, placement_is_sound};

/// Robots grasping one object, as a bit set over robot indices.
pub type Coalition = u32;

/// Maximum team size representable in a [`Coalition`].
pub const MAX_ROBOTS: usize = 32;

/// Iterates the robot indices in a coalition in ascending order.
pub fn members(c: Coalition) -> impl Iterator<Item = usize> {
    (0..MAX_ROBOTS).filter(move |i| c >> i & 1 == 1)
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown region index {0}")]
    UnknownRegion(usize),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, WorldError> {
    Err(WorldError::Invalid(msg.into()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub center: Point,
    pub radius: f64,
    /// Services offered to robots, keyed by 1-based robot number. Robots
    /// without an entry get the presence atom `"<i>-<region id>"`.
    #[serde(default)]
    pub robot_services: BTreeMap<String, Vec<String>>,
    /// Same for objects; the default atom is `"O<j>-<region id>"`.
    #[serde(default)]
    pub object_services: BTreeMap<String, Vec<String>>,
}

impl Region {
    pub fn disk(&self) -> Disk {
        Disk::new(self.center, self.radius)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RobotSpec {
    pub radius: f64,
    pub power: u32,
    pub mass: f64,
    #[serde(default)]
    pub friction: Friction,
    pub init_region: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub radius: f64,
    pub required_power: f64,
    pub mass: f64,
    #[serde(default)]
    pub friction: Friction,
    pub init_region: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Robot(usize),
    Object(usize),
    /// An object together with the robots grasping it.
    Coupled(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entity {
    pub kind: EntityKind,
    pub robots: Vec<usize>,
    pub object: Option<usize>,
    pub radius: f64,
}

type PackKey = (usize, Vec<u64>);

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub workspace: Disk,
    #[serde(default)]
    pub obstacles: Vec<Disk>,
    pub regions: Vec<Region>,
    pub robots: Vec<RobotSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    #[serde(default)]
    pub control: ControlParams,
    #[serde(skip)]
    derived: Derived,
}

#[derive(Clone, Debug, Default)]
struct Derived {
    region_index: HashMap<String, usize>,
    /// `robot_labels[k][i]`: atoms robot `i` sees in region `k`.
    robot_labels: Vec<Vec<Vec<String>>>,
    object_labels: Vec<Vec<Vec<String>>>,
    init_robots: Vec<usize>,
    init_objects: Vec<usize>,
    fits_cache: Arc<Mutex<HashMap<PackKey, bool>>>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, WorldError> {
        serde_json::from_str::<Scenario>(text)?.validated()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WorldError> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks the geometric and physical invariants and builds lookup tables.
    pub fn validated(mut self) -> Result<Self, WorldError> {
        let ws = self.workspace;
        if !(ws.radius > 0.0) {
            return invalid("workspace radius must be positive");
        }
        if self.regions.len() < 2 {
            return invalid("at least two regions of interest are required");
        }
        if self.robots.is_empty() || self.robots.len() > MAX_ROBOTS {
            return invalid(format!("robot count must be in 1..={MAX_ROBOTS}"));
        }
        for (n, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) || !ws.contains_ball(o.center, o.radius) {
                return invalid(format!("obstacle {n} must have positive radius and lie inside the workspace"));
            }
            for (m, p) in self.obstacles.iter().enumerate().take(n) {
                if o.gap(p) <= 0.0 {
                    return invalid(format!("obstacles {m} and {n} intersect"));
                }
            }
        }
        let mut region_index = HashMap::new();
        for (k, r) in self.regions.iter().enumerate() {
            if region_index.insert(r.id.clone(), k).is_some() {
                return invalid(format!("duplicate region id {}", r.id));
            }
            let d = r.disk();
            if !(r.radius > 0.0) || !(crate::geom::dist(d.center, ws.center) + d.radius < ws.radius) {
                return invalid(format!("region {} must lie strictly inside the workspace", r.id));
            }
            if let Some(n) = self.obstacles.iter().position(|o| d.gap(o) <= 0.0) {
                return invalid(format!("region {} touches obstacle {n}", r.id));
            }
            if let Some(q) = self.regions[..k].iter().find(|q| d.gap(&q.disk()) <= 0.0) {
                return invalid(format!("regions {} and {} intersect", q.id, r.id));
            }
        }
        let lookup = |id: &str| {
            region_index
                .get(id)
                .copied()
                .ok_or_else(|| WorldError::Invalid(format!("unknown initial region {id}")))
        };
        for (i, r) in self.robots.iter().enumerate() {
            if !(r.radius > 0.0 && r.mass > 0.0 && r.power > 0) {
                return invalid(format!("robot {} needs positive radius, mass and power", i + 1));
            }
        }
        for (j, o) in self.objects.iter().enumerate() {
            if !(o.radius > 0.0 && o.mass > 0.0 && o.required_power > 0.0) {
                return invalid(format!("object {} needs positive radius, mass and required power", j + 1));
            }
        }
        let init_robots = self
            .robots
            .iter()
            .map(|r| lookup(&r.init_region))
            .collect::<Result<Vec<_>, _>>()?;
        let init_objects = self
            .objects
            .iter()
            .map(|o| lookup(&o.init_region))
            .collect::<Result<Vec<_>, _>>()?;
        let bad = self.control.invalid_fields();
        if !bad.is_empty() {
            return invalid(format!("control parameters must be positive: {}", bad.join(", ")));
        }

        let labels = |services: &BTreeMap<String, Vec<String>>, n: usize, default: &dyn Fn(usize) -> String| {
            (0..n)
                .map(|e| {
                    services
                        .get(&(e + 1).to_string())
                        .cloned()
                        .unwrap_or_else(|| vec![default(e)])
                })
                .collect::<Vec<_>>()
        };
        let robot_labels = self
            .regions
            .iter()
            .map(|r| labels(&r.robot_services, self.robots.len(), &|i| format!("{}-{}", i + 1, r.id)))
            .collect();
        let object_labels = self
            .regions
            .iter()
            .map(|r| labels(&r.object_services, self.objects.len(), &|j| format!("O{}-{}", j + 1, r.id)))
            .collect();
        self.derived = Derived {
            region_index,
            robot_labels,
            object_labels,
            init_robots,
            init_objects,
            fits_cache: Arc::default(),
        };
        for k in 0..self.regions.len() {
            let mut radii: Vec<f64> = (0..self.robots.len())
                .filter(|&i| self.derived.init_robots[i] == k)
                .map(|i| self.robots[i].radius)
                .collect();
            radii.extend(
                (0..self.objects.len())
                    .filter(|&j| self.derived.init_objects[j] == k)
                    .map(|j| self.objects[j].radius),
            );
            if !self.fits(k, &radii) {
                return invalid(format!("initial occupants do not fit in region {}", self.regions[k].id));
            }
        }
        Ok(self)
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn region_index(&self, id: &str) -> Option<usize> {
        self.derived.region_index.get(id).copied()
    }

    pub fn init_robot_regions(&self) -> &[usize] {
        &self.derived.init_robots
    }

    pub fn init_object_regions(&self) -> &[usize] {
        &self.derived.init_objects
    }

    pub fn robot_services(&self, robot: usize, region: usize) -> &[String] {
        &self.derived.robot_labels[region][robot]
    }

    pub fn object_services(&self, object: usize, region: usize) -> &[String] {
        &self.derived.object_labels[region][object]
    }

    /// Every atom some labeling function can produce.
    pub fn atom_universe(&self) -> BTreeSet<String> {
        let d = &self.derived;
        d.robot_labels
            .iter()
            .chain(&d.object_labels)
            .flatten()
            .flatten()
            .cloned()
            .collect()
    }

    /// Atoms of the joint label, possibly with repetitions.
    pub fn label_atoms<'a>(
        &'a self,
        robot_regions: &'a [usize],
        object_regions: &'a [usize],
    ) -> impl Iterator<Item = &'a str> + 'a {
        let d = &self.derived;
        let robots = robot_regions
            .iter()
            .enumerate()
            .flat_map(move |(i, &k)| d.robot_labels[k][i].iter());
        let objects = object_regions
            .iter()
            .enumerate()
            .flat_map(move |(j, &k)| d.object_labels[k][j].iter());
        robots.chain(objects).map(String::as_str)
    }

    /// Union of the robots' and objects' services at the given regions.
    pub fn label_regions(
        &self,
        robot_regions: &[usize],
        object_regions: &[usize],
    ) -> Result<BTreeSet<String>, WorldError> {
        if let Some(&k) = robot_regions
            .iter()
            .chain(object_regions)
            .find(|&&k| k >= self.regions.len())
        {
            return Err(WorldError::UnknownRegion(k));
        }
        Ok(self
            .label_atoms(robot_regions, object_regions)
            .map(str::to_string)
            .collect())
    }

    pub fn coupled_radius(&self, object: usize, coalition: Coalition) -> f64 {
        let radii: Vec<f64> = members(coalition).map(|i| self.robots[i].radius).collect();
        coupled_radius(self.objects[object].radius, &radii)
    }

    pub fn lambda(&self, object: usize, coalition: Coalition) -> bool {
        let powers: Vec<u32> = members(coalition).map(|i| self.robots[i].power).collect();
        lambda_check(self.objects[object].required_power, &powers)
    }

    /// Entities induced by a grasp configuration (`grasp[j]` = robots holding
    /// object `j`): free robots, then free objects, then coupled systems.
    pub fn entities(&self, grasp: &[Coalition]) -> Vec<Entity> {
        let held: Coalition = grasp.iter().fold(0, |a, c| a | c);
        let mut out: Vec<Entity> = (0..self.robots.len())
            .filter(|i| held >> i & 1 == 0)
            .map(|i| Entity {
                kind: EntityKind::Robot(i),
                robots: vec![i],
                object: None,
                radius: self.robots[i].radius,
            })
            .collect();
        for (j, &c) in grasp.iter().enumerate() {
            if c == 0 {
                out.push(Entity {
                    kind: EntityKind::Object(j),
                    robots: Vec::new(),
                    object: Some(j),
                    radius: self.objects[j].radius,
                });
            }
        }
        for (j, &c) in grasp.iter().enumerate() {
            if c != 0 {
                out.push(Entity {
                    kind: EntityKind::Coupled(j),
                    robots: members(c).collect(),
                    object: Some(j),
                    radius: self.coupled_radius(j, c),
                });
            }
        }
        out
    }

    /// Packing feasibility of balls with the given radii in region `k`;
    /// memoized on the sorted radii.
    pub fn fits(&self, k: usize, radii: &[f64]) -> bool {
        let mut key: Vec<u64> = radii.iter().map(|r| r.to_bits()).collect();
        key.sort_unstable();
        key.push(self.regions[k].radius.to_bits());
        let key = (k, key);
        if let Some(&v) = self.derived.fits_cache.lock().unwrap().get(&key) {
            return v;
        }
        let v = pack_spheres(&self.regions[k].disk(), radii).is_some();
        self.derived.fits_cache.lock().unwrap().insert(key, v);
        v
    }
}

/// Radius of the ball covering an object and the robots grasping it on its
/// boundary: `r_o + 2 max r_i`.
pub fn coupled_radius(object_radius: f64, robot_radii: &[f64]) -> f64 {
    object_radius + 2.0 * robot_radii.iter().copied().fold(0.0, f64::max)
}

/// Whether a coalition with the given powers can transport an object.
pub fn lambda_check(required_power: f64, powers: &[u32]) -> bool {
    powers.iter().map(|&p| f64::from(p)).sum::<f64>() >= required_power
}
