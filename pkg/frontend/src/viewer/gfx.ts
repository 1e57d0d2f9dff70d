/** Minimal vector / quaternion / matrix math for the viewer (column-major
 * mat4, OpenGL clip conventions). */

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // x, y, z, w
export type Mat4 = Float32Array; // 16 entries, column-major

export function vsub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

export function vadd(a: Vec3, b: Vec3): Vec3 {
  return [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
}

export function vscale(a: Vec3, s: number): Vec3 {
  return [a[0] * s, a[1] * s, a[2] * s];
}

export function vlength(a: Vec3): number {
  return Math.hypot(a[0], a[1], a[2]);
}

export function vnormalize(a: Vec3): Vec3 {
  const len = vlength(a);
  return len > 0 ? vscale(a, 1 / len) : [0, 0, 0];
}

export function vcross(a: Vec3, b: Vec3): Vec3 {
  return [
    a[1] * b[2] - a[2] * b[1],
    a[2] * b[0] - a[0] * b[2],
    a[0] * b[1] - a[1] * b[0],
  ];
}

export function vdot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

export function qnormalize(q: Quat): Quat {
  const len = Math.hypot(q[0], q[1], q[2], q[3]) || 1;
  return [q[0] / len, q[1] / len, q[2] / len, q[3] / len];
}

export function qmultiply(a: Quat, b: Quat): Quat {
  return [
    a[3] * b[0] + a[0] * b[3] + a[1] * b[2] - a[2] * b[1],
    a[3] * b[1] - a[0] * b[2] + a[1] * b[3] + a[2] * b[0],
    a[3] * b[2] + a[0] * b[1] - a[1] * b[0] + a[2] * b[3],
    a[3] * b[3] - a[0] * b[0] - a[1] * b[1] - a[2] * b[2],
  ];
}

export function qFromAxisAngle(axis: Vec3, angle: number): Quat {
  const half = angle / 2;
  const s = Math.sin(half);
  const a = vnormalize(axis);
  return [a[0] * s, a[1] * s, a[2] * s, Math.cos(half)];
}

export function qRotate(q: Quat, v: Vec3): Vec3 {
  const [x, y, z, w] = q;
  const ux = 2 * (y * v[2] - z * v[1]);
  const uy = 2 * (z * v[0] - x * v[2]);
  const uz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * ux + y * uz - z * uy,
    v[1] + w * uy + z * ux - x * uz,
    v[2] + w * uz + x * uy - y * ux,
  ];
}

/** Orientation that looks from `eye` toward `target` with an up hint. */
export function lookOrientation(eye: Vec3, target: Vec3, up: Vec3 = [0, 1, 0]): Quat {
  const forward = vnormalize(vsub(target, eye)); // camera -z
  let right = vcross(forward, up);
  if (vlength(right) < 1e-6) right = [1, 0, 0];
  right = vnormalize(right);
  const trueUp = vcross(right, forward);
  // rotation matrix columns: right, trueUp, -forward
  const m00 = right[0], m01 = trueUp[0], m02 = -forward[0];
  const m10 = right[1], m11 = trueUp[1], m12 = -forward[1];
  const m20 = right[2], m21 = trueUp[2], m22 = -forward[2];
  const trace = m00 + m11 + m22;
  let q: Quat;
  if (trace > 0) {
    const s = Math.sqrt(trace + 1) * 2;
    q = [(m21 - m12) / s, (m02 - m20) / s, (m10 - m01) / s, s / 4];
  } else if (m00 > m11 && m00 > m22) {
    const s = Math.sqrt(1 + m00 - m11 - m22) * 2;
    q = [s / 4, (m01 + m10) / s, (m02 + m20) / s, (m21 - m12) / s];
  } else if (m11 > m22) {
    const s = Math.sqrt(1 + m11 - m00 - m22) * 2;
    q = [(m01 + m10) / s, s / 4, (m12 + m21) / s, (m02 - m20) / s];
  } else {
    const s = Math.sqrt(1 + m22 - m00 - m11) * 2;
    q = [(m02 + m20) / s, (m12 + m21) / s, s / 4, (m10 - m01) / s];
  }
  return qnormalize(q);
}

/** View matrix from camera position + orientation quaternion. */
export function viewMatrix(position: Vec3, orientation: Quat): Mat4 {
  const right = qRotate(orientation, [1, 0, 0]);
  const up = qRotate(orientation, [0, 1, 0]);
  const back = qRotate(orientation, [0, 0, 1]); // camera looks along -z
  const m = new Float32Array(16);
  m[0] = right[0]; m[4] = right[1]; m[8] = right[2];
  m[1] = up[0]; m[5] = up[1]; m[9] = up[2];
  m[2] = back[0]; m[6] = back[1]; m[10] = back[2];
  m[12] = -vdot(right, position);
  m[13] = -vdot(up, position);
  m[14] = -vdot(back, position);
  m[15] = 1;
  return m;
}

export function perspectiveMatrix(fovY: number, aspect: number, near: number, far: number): Mat4 {
  const f = 1 / Math.tan(fovY / 2);
  const m = new Float32Array(16);
  m[0] = f / aspect;
  m[5] = f;
  m[10] = (far + near) / (near - far);
  m[11] = -1;
  m[14] = (2 * far * near) / (near - far);
  return m;
}

export function mat4Multiply(a: Mat4, b: Mat4): Mat4 {
  const out = new Float32Array(16);
  for (let col = 0; col < 4; col++) {
    for (let row = 0; row < 4; row++) {
      let sum = 0;
      for (let k = 0; k < 4; k++) sum += a[k * 4 + row] * b[col * 4 + k];
      out[col * 4 + row] = sum;
    }
  }
  return out;
}
