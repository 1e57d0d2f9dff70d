/** Orbit-style camera edits. Each gesture produces a complete new camera
 * object; the caller ships it through the session (the echo is what
 * actually moves the view). */

import type { Camera } from "../model.js";
import {
  lookOrientation,
  qFromAxisAngle,
  qmultiply,
  qnormalize,
  qRotate,
  vadd,
  vlength,
  vnormalize,
  vscale,
  vsub,
  type Vec3,
} from "./gfx.js";

const ORBIT_SPEED = 0.008; // radians per pixel
const PAN_SPEED = 0.0016; // world units per pixel per unit distance
const MIN_DISTANCE = 2;
const MAX_DISTANCE = 2500;

export function orbit(camera: Camera, dxPixels: number, dyPixels: number): Camera {
  const target = camera.target as Vec3;
  const offset = vsub(camera.position as Vec3, target);
  const right = qRotate(camera.orientation, [1, 0, 0]);
  const yaw = qFromAxisAngle([0, 1, 0], -dxPixels * ORBIT_SPEED);
  const pitch = qFromAxisAngle(right, -dyPixels * ORBIT_SPEED);
  const spin = qmultiply(yaw, pitch);
  const newOffset = qRotate(spin, offset);
  const position = vadd(target, newOffset);
  return {
    position: [position[0], position[1], position[2]],
    orientation: qnormalize(lookOrientation(position, target)),
    target: [...target],
  };
}

export function zoom(camera: Camera, wheelDelta: number): Camera {
  const target = camera.target as Vec3;
  const offset = vsub(camera.position as Vec3, target);
  const factor = Math.exp(wheelDelta * 0.001);
  let distance = vlength(offset) * factor;
  distance = Math.min(Math.max(distance, MIN_DISTANCE), MAX_DISTANCE);
  const position = vadd(target, vscale(vnormalize(offset), distance));
  return {
    position: [position[0], position[1], position[2]],
    orientation: [...camera.orientation],
    target: [...target],
  };
}

export function pan(camera: Camera, dxPixels: number, dyPixels: number): Camera {
  const distance = vlength(vsub(camera.position as Vec3, camera.target as Vec3));
  const right = qRotate(camera.orientation, [1, 0, 0]);
  const up = qRotate(camera.orientation, [0, 1, 0]);
  const shift = vadd(
    vscale(right, -dxPixels * PAN_SPEED * distance),
    vscale(up, dyPixels * PAN_SPEED * distance),
  );
  const position = vadd(camera.position as Vec3, shift);
  const target = vadd(camera.target as Vec3, shift);
  return {
    position: [position[0], position[1], position[2]],
    orientation: [...camera.orientation],
    target: [target[0], target[1], target[2]],
  };
}

/** Default home view: pulled back along +z far enough to frame the brain. */
export function homeCamera(centroid: Vec3, extent: number): Camera {
  const position: Vec3 = [centroid[0], centroid[1], centroid[2] + Math.max(extent * 2.2, 50)];
  return {
    position: [position[0], position[1], position[2]],
    orientation: qnormalize(lookOrientation(position, centroid)),
    target: [centroid[0], centroid[1], centroid[2]],
  };
}
