use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Point or vector in the plane. Positions are meters, controls meters/second.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(
    from = "[S; 2]",
    into = "[S; 2]",
    bound(serialize = "S: Serialize + Copy", deserialize = "S: Deserialize<'de>")
)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S> From<[S; 2]> for Vec2<S> {
    fn from([x, y]: [S; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl<S> From<Vec2<S>> for [S; 2] {
    fn from(v: Vec2<S>) -> Self {
        [v.x, v.y]
    }
}

impl<S: Scalar> Vec2<S> {
    pub const fn new(x: S, y: S) -> Self {
        Vec2 { x, y }
    }

    pub fn zero() -> Self {
        Vec2 { x: S::zero(), y: S::zero() }
    }

    /// Euclidean norm.
    pub fn norm(self) -> S {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> S {
        (self - other).norm()
    }

    pub fn dot(self, other: Self) -> S {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> S {
        self.x * other.y - self.y * other.x
    }

    pub fn scale(self, c: S) -> Self {
        Vec2 { x: self.x * c, y: self.y * c }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<T: Scalar>(self) -> Vec2<T> {
        Vec2 { x: T::lit(self.x.as_f64()), y: T::lit(self.y.as_f64()) }
    }
}

impl<S: Scalar> Add for Vec2<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Vec2 { x: self.x + rhs.x, y: self.y + rhs.y }
    }
}

impl<S: Scalar> AddAssign for Vec2<S> {
    fn add_assign(&mut self, rhs: Self) {
        self.x = self.x + rhs.x;
        self.y = self.y + rhs.y;
    }
}

impl<S: Scalar> Sub for Vec2<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Vec2 { x: self.x - rhs.x, y: self.y - rhs.y }
    }
}

impl<S: Scalar> Neg for Vec2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec2 { x: -self.x, y: -self.y }
    }
}

impl<S: Scalar> Mul<S> for Vec2<S> {
    type Output = Self;
    fn mul(self, c: S) -> Self {
        self.scale(c)
    }
}
