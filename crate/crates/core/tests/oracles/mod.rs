#![allow(dead_code)]

pub mod marching;
pub mod sphere_bfs;
