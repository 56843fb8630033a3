//! Minimal 3D vector arithmetic.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Self::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))
    }

    pub fn to_f64(self) -> [f64; 3] {
        [self.x.as_f64(), self.y.as_f64(), self.z.as_f64()]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Self {
        self.scale(T::one() / self.norm())
    }

    pub fn component_mul(self, o: Self) -> Self {
        Self::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn distance(self, o: Self) -> T {
        (self - o).norm()
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Scalar> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox<T> {
    pub lo: Vec3<T>,
    pub hi: Vec3<T>,
}

impl<T: Scalar> BoundingBox<T> {
    pub fn empty() -> Self {
        let inf = T::infinity();
        Self {
            lo: Vec3::new(inf, inf, inf),
            hi: Vec3::new(-inf, -inf, -inf),
        }
    }

    pub fn from_corners(lo: Vec3<T>, hi: Vec3<T>) -> Self {
        Self { lo, hi }
    }

    pub fn include(&mut self, p: Vec3<T>) {
        self.lo = self.lo.min(p);
        self.hi = self.hi.max(p);
    }

    pub fn merge(&self, o: &Self) -> Self {
        Self {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    pub fn extent(&self) -> Vec3<T> {
        self.hi - self.lo
    }

    /// Length of the box diagonal.
    pub fn diameter(&self) -> T {
        self.extent().norm()
    }

    /// Euclidean norm of the component-wise gap between two boxes.
    pub fn distance(&self, o: &Self) -> T {
        let gap = |a_lo: T, a_hi: T, b_lo: T, b_hi: T| {
            (b_lo - a_hi).max(a_lo - b_hi).max(T::zero())
        };
        let g = Vec3::new(
            gap(self.lo.x, self.hi.x, o.lo.x, o.hi.x),
            gap(self.lo.y, self.hi.y, o.lo.y, o.hi.y),
            gap(self.lo.z, self.hi.z, o.lo.z, o.hi.z),
        );
        g.norm()
    }

    /// Index of the longest axis; ties resolve to the lowest axis.
    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        let mut axis = 0;
        for k in 1..3 {
            if e[k] > e[axis] {
                axis = k;
            }
        }
        axis
    }
}
