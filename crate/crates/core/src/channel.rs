//! Channel synthesis: UPA steering vectors, THz pathloss, Rician reflecting
//! links through the RIS and Rayleigh direct links.
//!
//! All nodes sit in one horizontal plane, so every elevation angle is fixed at
//! broadside (`π/2`) and azimuths come from the 2D positions. Each array's
//! azimuth is measured from its own normal:
//!
//! - the BS normal points at the RIS (the BS-RIS axis),
//! - the RIS normal bisects the directions to the BS and to the zone center,
//! - every user normal points from the zone center towards the RIS.

use std::f64::consts::{FRAC_PI_2, PI};
use std::hash::{Hash, Hasher};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{cis, is_finite, outer, CMatrix, CVector};
use num_complex::Complex64;

/// Rectangular antenna grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpaGeometry {
    pub width: usize,
    pub height: usize,
    /// Element spacing over wavelength, `d/λ`.
    pub spacing_ratio: f64,
}

impl UpaGeometry {
    pub fn new(width: usize, height: usize, spacing_ratio: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain(format!(
                "UPA dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::Domain(format!(
                "spacing ratio must be positive, got {spacing_ratio}"
            )));
        }
        Ok(Self {
            width,
            height,
            spacing_ratio,
        })
    }

    /// Half-wavelength spaced grid.
    pub fn half_wavelength(width: usize, height: usize) -> Self {
        Self::new(width, height, 0.5).expect("positive dimensions")
    }

    pub fn elements(&self) -> usize {
        self.width * self.height
    }
}

/// Azimuth/elevation pair in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angles {
    pub azimuth: f64,
    pub elevation: f64,
}

impl Angles {
    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }

    /// In-plane direction: elevation at broadside.
    pub fn planar(azimuth: f64) -> Self {
        Self::new(azimuth, FRAC_PI_2)
    }
}

/// UPA response `exp(j2π(d/λ)(m sinφ sinϕ + n cosϕ))`.
///
/// Flattening is horizontal-major: element `(m, n)` lands at index `m * height + n`.
pub fn steering_vector(geom: &UpaGeometry, azimuth: f64, elevation: f64) -> CVector {
    let horizontal = azimuth.sin() * elevation.sin();
    let vertical = elevation.cos();
    let k = 2.0 * PI * geom.spacing_ratio;
    CVector::from_iterator(
        geom.elements(),
        (0..geom.width).flat_map(move |m| {
            (0..geom.height).map(move |n| cis(k * (m as f64 * horizontal + n as f64 * vertical)))
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// BS-RIS and RIS-user links.
    Reflect,
    /// Blocked BS-user link (NLOS only).
    Direct,
}

/// Pathloss in dB for a distance in meters and a carrier in GHz.
pub fn pathloss_db(kind: LinkKind, distance: f64, carrier_ghz: f64) -> Result<f64> {
    if !(distance > 0.0) || !(carrier_ghz > 0.0) {
        return Err(Error::Domain(format!(
            "pathloss needs positive distance and frequency, got d={distance}, f_c={carrier_ghz}"
        )));
    }
    Ok(match kind {
        LinkKind::Reflect => 32.4 + 21.0 * distance.log10() + 20.0 * carrier_ghz.log10(),
        LinkKind::Direct => 22.4 + 35.3 * distance.log10() + 21.3 * carrier_ghz.log10(),
    })
}

/// Linear amplitude gain for a loss in dB.
pub fn amplitude_gain(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 20.0)
}

/// Rank-1 LOS component `a_rx(rx) a_tx(tx)^H`.
pub fn los_outer_product(
    rx_geom: &UpaGeometry,
    rx_angles: Angles,
    tx_geom: &UpaGeometry,
    tx_angles: Angles,
) -> CMatrix {
    let rx = steering_vector(rx_geom, rx_angles.azimuth, rx_angles.elevation);
    let tx = steering_vector(tx_geom, tx_angles.azimuth, tx_angles.elevation);
    outer(&rx, &tx)
}

/// One `CN(0, 1)` sample.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. `CN(0, 1)` matrix, drawn row by row.
fn complex_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    CMatrix::from_row_slice(rows, cols, &data)
}

/// `gain * (sqrt(k/(k+1)) los + sqrt(1/(k+1)) X)` with `X` i.i.d. `CN(0, 1)`.
///
/// `k = ∞` yields the pure LOS matrix; the NLOS draw is still consumed so the
/// random stream does not depend on `k`.
pub fn draw_rician<R: Rng + ?Sized>(los: &CMatrix, k: f64, gain: f64, rng: &mut R) -> CMatrix {
    let (los_w, nlos_w) = if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    };
    let nlos = complex_normal_matrix(los.nrows(), los.ncols(), rng);
    (los * Complex64::from(los_w) + nlos * Complex64::from(nlos_w)) * Complex64::from(gain)
}

/// Rayleigh matrix with entries `gain * CN(0, 1)`.
pub fn draw_rayleigh_direct<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    gain: f64,
    rng: &mut R,
) -> CMatrix {
    complex_normal_matrix(rows, cols, rng) * Complex64::from(gain)
}

pub type Point = [f64; 2];

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

pub fn distance(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

fn unit(a: Point) -> Point {
    let n = norm(a);
    [a[0] / n, a[1] / n]
}

/// Signed angle from `normal` to `direction`.
fn azimuth_from(normal: Point, direction: Point) -> f64 {
    let cross = normal[0] * direction[1] - normal[1] * direction[0];
    let dot = normal[0] * direction[0] + normal[1] * direction[1];
    cross.atan2(dot)
}

/// Planar deployment of BS, RIS and users.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioGeometry {
    pub bs_position: Point,
    pub ris_position: Point,
    pub user_positions: Vec<Point>,
    pub zone_center: Point,
    pub zone_radius: f64,
}

impl ScenarioGeometry {
    /// BS at the origin, RIS 100 m away, users gathered within 20 m of a point
    /// 40 m from the RIS.
    pub fn reference(user_positions: Vec<Point>) -> Self {
        Self {
            bs_position: [0.0, 0.0],
            ris_position: [100.0, 0.0],
            user_positions,
            zone_center: [100.0, 40.0],
            zone_radius: 20.0,
        }
    }

    /// Reference layout with `users` positions drawn uniformly (by area) in the zone.
    pub fn sample_reference<R: Rng + ?Sized>(users: usize, rng: &mut R) -> Self {
        let mut geometry = Self::reference(Vec::new());
        geometry.user_positions = geometry.sample_users(users, rng);
        geometry
    }

    pub fn sample_users<R: Rng + ?Sized>(&self, users: usize, rng: &mut R) -> Vec<Point> {
        (0..users)
            .map(|_| {
                let radius = self.zone_radius * rng.random::<f64>().sqrt();
                let angle = 2.0 * PI * rng.random::<f64>();
                [
                    self.zone_center[0] + radius * angle.cos(),
                    self.zone_center[1] + radius * angle.sin(),
                ]
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !(distance(self.bs_position, self.ris_position) > 0.0) {
            return Err(Error::Domain("BS and RIS coincide".into()));
        }
        if !(self.zone_radius >= 0.0) {
            return Err(Error::Domain("zone radius must be non-negative".into()));
        }
        for (j, &u) in self.user_positions.iter().enumerate() {
            if distance(u, self.zone_center) > self.zone_radius * (1.0 + 1e-12) {
                return Err(Error::Domain(format!(
                    "user {j} lies outside the gathering zone"
                )));
            }
            if !(distance(u, self.bs_position) > 0.0) {
                return Err(Error::Domain(format!("user {j} coincides with the BS")));
            }
            if !(distance(u, self.ris_position) > 0.0) {
                return Err(Error::Domain(format!("user {j} coincides with the RIS")));
            }
        }
        Ok(())
    }

    fn bs_normal(&self) -> Point {
        unit(sub(self.ris_position, self.bs_position))
    }

    fn ris_normal(&self) -> Point {
        let to_bs = unit(sub(self.bs_position, self.ris_position));
        let to_zone = sub(self.zone_center, self.ris_position);
        if norm(to_zone) == 0.0 {
            return to_bs;
        }
        let to_zone = unit(to_zone);
        let bisector = [to_bs[0] + to_zone[0], to_bs[1] + to_zone[1]];
        if norm(bisector) < 1e-12 {
            to_bs
        } else {
            unit(bisector)
        }
    }

    fn user_normal(&self) -> Point {
        let towards_ris = sub(self.ris_position, self.zone_center);
        if norm(towards_ris) == 0.0 {
            [0.0, -1.0]
        } else {
            unit(towards_ris)
        }
    }

    /// Departure angle at the BS towards the RIS.
    pub fn bs_departure(&self) -> Angles {
        Angles::planar(azimuth_from(
            self.bs_normal(),
            sub(self.ris_position, self.bs_position),
        ))
    }

    /// Arrival angle at the RIS from the BS.
    pub fn ris_arrival(&self) -> Angles {
        Angles::planar(azimuth_from(
            self.ris_normal(),
            sub(self.bs_position, self.ris_position),
        ))
    }

    /// Departure angle at the RIS towards user `j`.
    pub fn ris_departure(&self, j: usize) -> Angles {
        Angles::planar(azimuth_from(
            self.ris_normal(),
            sub(self.user_positions[j], self.ris_position),
        ))
    }

    /// Arrival angle at user `j` from the RIS.
    pub fn user_arrival(&self, j: usize) -> Angles {
        Angles::planar(azimuth_from(
            self.user_normal(),
            sub(self.ris_position, self.user_positions[j]),
        ))
    }
}

/// Rician factors of the BS-RIS (`k1`) and RIS-user (`k2`) links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianParams {
    pub k1: f64,
    pub k2: f64,
}

impl RicianParams {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if !(k1 >= 0.0) || !(k2 >= 0.0) {
            return Err(Error::Domain(format!(
                "Rician factors must be non-negative, got k1={k1}, k2={k2}"
            )));
        }
        Ok(Self { k1, k2 })
    }
}

impl Default for RicianParams {
    fn default() -> Self {
        Self { k1: 10.0, k2: 10.0 }
    }
}

/// How table pathloss values become channel amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainNormalization {
    /// Amplitude `10^(-PL/20)` of the absolute pathloss.
    Absolute,
    /// Each link family is referenced to its pathloss at the point of the
    /// gathering zone nearest to its transmitter (the BS-RIS link to its own
    /// length), so gains stay in `(0, 1]` while keeping the per-user spread.
    ZoneReferenced,
}

/// Array dimensions and carrier needed to synthesize a [`ChannelSet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub bs: UpaGeometry,
    pub ris: UpaGeometry,
    pub user: UpaGeometry,
    pub carrier_ghz: f64,
    pub normalization: GainNormalization,
}

/// Every channel matrix of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// `H_d,j`: user antennas x BS antennas.
    pub direct: Vec<CMatrix>,
    /// `G`: RIS elements x BS antennas.
    pub bs_to_ris: CMatrix,
    /// `H_r,j`: user antennas x RIS elements.
    pub ris_to_user: Vec<CMatrix>,
    /// Amplitude gains `10^(-PL/20)` applied to each link, after the optional
    /// zone referencing.
    pub pathloss_direct: Vec<f64>,
    pub pathloss_reflect_g: f64,
    pub pathloss_reflect_r: Vec<f64>,
}

impl ChannelSet {
    pub fn users(&self) -> usize {
        self.direct.len()
    }

    pub fn bs_antennas(&self) -> usize {
        self.bs_to_ris.ncols()
    }

    pub fn ris_elements(&self) -> usize {
        self.bs_to_ris.nrows()
    }

    pub fn user_antennas(&self, j: usize) -> usize {
        self.direct[j].nrows()
    }

    /// Hash over the exact bit patterns of every entry.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        let mut feed = |m: &CMatrix| {
            m.nrows().hash(&mut hasher);
            m.ncols().hash(&mut hasher);
            for z in m.iter() {
                z.re.to_bits().hash(&mut hasher);
                z.im.to_bits().hash(&mut hasher);
            }
        };
        for m in &self.direct {
            feed(m);
        }
        feed(&self.bs_to_ris);
        for m in &self.ris_to_user {
            feed(m);
        }
        for g in self
            .pathloss_direct
            .iter()
            .chain(std::iter::once(&self.pathloss_reflect_g))
            .chain(&self.pathloss_reflect_r)
        {
            g.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }

    /// Checks shapes against each other and entries for finiteness.
    pub fn validate(&self) -> Result<()> {
        let users = self.users();
        if self.ris_to_user.len() != users
            || self.pathloss_direct.len() != users
            || self.pathloss_reflect_r.len() != users
        {
            return Err(Error::Domain(
                "per-user channel lists differ in length".into(),
            ));
        }
        for j in 0..users {
            if self.direct[j].ncols() != self.bs_antennas()
                || self.ris_to_user[j].ncols() != self.ris_elements()
                || self.ris_to_user[j].nrows() != self.direct[j].nrows()
            {
                return Err(Error::Domain(format!(
                    "channel shapes of user {j} are inconsistent"
                )));
            }
            if !is_finite(&self.direct[j]) || !is_finite(&self.ris_to_user[j]) {
                return Err(Error::Domain(format!(
                    "non-finite channel entry for user {j}"
                )));
            }
        }
        if !is_finite(&self.bs_to_ris) {
            return Err(Error::Domain("non-finite BS-RIS channel entry".into()));
        }
        Ok(())
    }
}

fn reference_distance(from: Point, geometry: &ScenarioGeometry, what: &str) -> Result<f64> {
    let d = distance(from, geometry.zone_center) - geometry.zone_radius;
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::Domain(format!(
            "gathering zone reaches the {what}; zone-referenced gains are undefined"
        )))
    }
}

/// Draws `G` (Rician, `k1`), every `H_r,j` (Rician, `k2`) and every `H_d,j`
/// (Rayleigh), in that order, from `rng`.
pub fn build_channel_set<R: Rng + ?Sized>(
    spec: &ChannelSpec,
    geometry: &ScenarioGeometry,
    rician: &RicianParams,
    rng: &mut R,
) -> Result<ChannelSet> {
    geometry.validate()?;
    let users = geometry.user_positions.len();
    let fc = spec.carrier_ghz;

    let d_g = distance(geometry.bs_position, geometry.ris_position);
    let d_direct: Vec<f64> = geometry
        .user_positions
        .iter()
        .map(|&u| distance(geometry.bs_position, u))
        .collect();
    let d_reflect: Vec<f64> = geometry
        .user_positions
        .iter()
        .map(|&u| distance(geometry.ris_position, u))
        .collect();

    let (ref_g, ref_direct, ref_reflect) = match spec.normalization {
        GainNormalization::Absolute => (0.0, 0.0, 0.0),
        GainNormalization::ZoneReferenced => (
            pathloss_db(LinkKind::Reflect, d_g, fc)?,
            pathloss_db(
                LinkKind::Direct,
                reference_distance(geometry.bs_position, geometry, "BS")?,
                fc,
            )?,
            pathloss_db(
                LinkKind::Reflect,
                reference_distance(geometry.ris_position, geometry, "RIS")?,
                fc,
            )?,
        ),
    };

    let pathloss_reflect_g = amplitude_gain(pathloss_db(LinkKind::Reflect, d_g, fc)? - ref_g);
    let pathloss_direct = d_direct
        .iter()
        .map(|&d| {
            Ok(amplitude_gain(
                pathloss_db(LinkKind::Direct, d, fc)? - ref_direct,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let pathloss_reflect_r = d_reflect
        .iter()
        .map(|&d| {
            Ok(amplitude_gain(
                pathloss_db(LinkKind::Reflect, d, fc)? - ref_reflect,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let g_los = los_outer_product(
        &spec.ris,
        geometry.ris_arrival(),
        &spec.bs,
        geometry.bs_departure(),
    );
    let bs_to_ris = draw_rician(&g_los, rician.k1, pathloss_reflect_g, rng);

    let mut ris_to_user = Vec::with_capacity(users);
    let mut direct = Vec::with_capacity(users);
    for j in 0..users {
        let los = los_outer_product(
            &spec.user,
            geometry.user_arrival(j),
            &spec.ris,
            geometry.ris_departure(j),
        );
        ris_to_user.push(draw_rician(&los, rician.k2, pathloss_reflect_r[j], rng));
        direct.push(draw_rayleigh_direct(
            spec.user.elements(),
            spec.bs.elements(),
            pathloss_direct[j],
            rng,
        ));
    }

    let set = ChannelSet {
        direct,
        bs_to_ris,
        ris_to_user,
        pathloss_direct,
        pathloss_reflect_g,
        pathloss_reflect_r,
    };
    set.validate()?;
    Ok(set)
}
