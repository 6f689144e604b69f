# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

"""
Minimal deterministic 2D rigid-body engine.

Dynamic circles collide with each other and with static wall segments.
Contacts are resolved with sequential impulses (projected Gauss-Seidel on the
accumulated normal impulse) followed by position correction.  Bodies are kept
in a struct-of-arrays container ordered by id, and every loop over bodies or
contacts follows that order, so identical inputs always give bit-identical
outputs.
"""

from collections import defaultdict
from dataclasses import dataclass, field
import math
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from utils.misc import require, wrap_angle

# kind tag reported by raycast for wall hits; bodies use any other integer
WALL_KIND = 0

# neighbour cells visited from each grid cell so that every pair of cells is seen once
_HALF_NEIGHBOURHOOD = ((1, -1), (1, 0), (1, 1), (0, 1))


@dataclass
class Body:
    id: int
    center: np.ndarray
    orientation: float = 0.0
    linear_velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))
    angular_velocity: float = 0.0
    radius: float = 1.0
    inverse_mass: float = 1.0
    inverse_inertia: float = 0.0
    kind: int = 1
    sensor: bool = False

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        self.linear_velocity = np.asarray(self.linear_velocity, dtype=np.float64)
        self.orientation = float(wrap_angle(self.orientation))
        require(self.radius > 0, f'Body {self.id}: radius must be positive, got {self.radius}')
        require(self.inverse_mass >= 0, f'Body {self.id}: inverse_mass must be >= 0')
        require(self.inverse_inertia >= 0, f'Body {self.id}: inverse_inertia must be >= 0')

    @property
    def static(self) -> bool:
        return self.inverse_mass == 0


@dataclass(frozen=True)
class WallSegment:
    start: Tuple[float, float]
    end: Tuple[float, float]

    def __post_init__(self):
        require(tuple(self.start) != tuple(self.end), 'Wall segment endpoints must be distinct')

    def closest_points(self, points: np.ndarray) -> np.ndarray:
        """
        Closest point on the segment for each of the given points.

        :param points: (n, 2) array
        :return: (n, 2) array
        """
        start = np.asarray(self.start, dtype=np.float64)
        edge = np.asarray(self.end, dtype=np.float64) - start
        t = np.clip((points - start) @ edge / (edge @ edge), 0.0, 1.0)
        return start + t[:, None] * edge

    def unit_normal(self) -> np.ndarray:
        edge = np.subtract(self.end, self.start, dtype=np.float64)
        return np.array([-edge[1], edge[0]]) / math.hypot(*edge)


@dataclass
class Contact:
    body_a: int
    body_b: Optional[int]
    normal: np.ndarray
    penetration_depth: float
    contact_point: np.ndarray
    accumulated_normal_impulse: float = 0.0
    accumulated_tangent_impulse: float = 0.0
    wall_index: Optional[int] = None
    sensor: bool = False

    @property
    def is_wall(self) -> bool:
        return self.body_b is None

    def sort_key(self):
        if self.is_wall:
            return (self.body_a, 1, self.wall_index)
        return (self.body_a, 0, self.body_b)


@dataclass(frozen=True)
class SolverConfig:
    velocity_iterations: int = 8
    position_iterations: int = 8
    penetration_slop: float = 0.005
    position_correction_factor: float = 0.2
    restitution: float = 0.0
    friction_coefficient: float = 0.0
    finishing_sweeps: int = 64

    def __post_init__(self):
        require(self.velocity_iterations >= 1, 'physics.velocity_iterations must be >= 1')
        require(self.position_iterations >= 1, 'physics.position_iterations must be >= 1')
        require(self.penetration_slop >= 0, 'physics.penetration_slop must be >= 0')
        require(0 < self.position_correction_factor <= 1,
                'physics.position_correction_factor must be in (0, 1]')
        require(0 <= self.restitution <= 1, 'physics.restitution must be in [0, 1]')
        require(self.friction_coefficient >= 0, 'physics.friction_coefficient must be >= 0')
        require(self.finishing_sweeps >= 0, 'physics.finishing_sweeps must be >= 0')


class Bodies(object):

    """
    Struct-of-arrays storage for circle bodies, ordered by ascending id.
    """

    def __init__(self):
        self.ids = np.empty(0, dtype=np.int64)
        self.center = np.empty((0, 2))
        self.orientation = np.empty(0)
        self.linear_velocity = np.empty((0, 2))
        self.angular_velocity = np.empty(0)
        self.radius = np.empty(0)
        self.inverse_mass = np.empty(0)
        self.inverse_inertia = np.empty(0)
        self.kind = np.empty(0, dtype=np.int64)
        self.sensor = np.empty(0, dtype=bool)

    _columns = ('ids', 'center', 'orientation', 'linear_velocity', 'angular_velocity',
                'radius', 'inverse_mass', 'inverse_inertia', 'kind', 'sensor')

    @classmethod
    def from_bodies(cls, bodies: Iterable[Body]) -> 'Bodies':
        result = cls()
        for body in sorted(bodies, key=lambda b: b.id):
            result.add(body)
        return result

    def __len__(self):
        return len(self.ids)

    def copy(self) -> 'Bodies':
        result = Bodies()
        for column in self._columns:
            setattr(result, column, getattr(self, column).copy())
        return result

    def add(self, body: Body):
        """
        Insert a body, keeping the id ordering.
        """
        position = int(np.searchsorted(self.ids, body.id))
        if position < len(self.ids) and self.ids[position] == body.id:
            raise ValueError(f'Duplicate body id {body.id}')
        values = {
            'ids': body.id, 'center': body.center, 'orientation': body.orientation,
            'linear_velocity': body.linear_velocity, 'angular_velocity': body.angular_velocity,
            'radius': body.radius, 'inverse_mass': body.inverse_mass,
            'inverse_inertia': body.inverse_inertia, 'kind': body.kind, 'sensor': body.sensor,
        }
        for column, value in values.items():
            setattr(self, column, np.insert(getattr(self, column), position, value, axis=0))

    def remove(self, body_id: int):
        index = self.index_of(body_id)
        for column in self._columns:
            setattr(self, column, np.delete(getattr(self, column), index, axis=0))

    def index_of(self, body_id: int) -> int:
        index = int(np.searchsorted(self.ids, body_id))
        if index >= len(self.ids) or self.ids[index] != body_id:
            raise KeyError(body_id)
        return index

    def __contains__(self, body_id: int) -> bool:
        index = int(np.searchsorted(self.ids, body_id))
        return index < len(self.ids) and self.ids[index] == body_id

    def body(self, body_id: int) -> Body:
        i = self.index_of(body_id)
        return Body(int(self.ids[i]), self.center[i].copy(), float(self.orientation[i]),
                    self.linear_velocity[i].copy(), float(self.angular_velocity[i]),
                    float(self.radius[i]), float(self.inverse_mass[i]),
                    float(self.inverse_inertia[i]), int(self.kind[i]), bool(self.sensor[i]))

    def kinetic_energy(self) -> float:
        dynamic = self.inverse_mass > 0
        linear = np.sum(self.linear_velocity[dynamic] ** 2, axis=1) / self.inverse_mass[dynamic]
        rotating = dynamic & (self.inverse_inertia > 0)
        angular = self.angular_velocity[rotating] ** 2 / self.inverse_inertia[rotating]
        return 0.5 * float(np.sum(linear) + np.sum(angular))


BodiesLike = Union[Bodies, Sequence[Body]]


def _as_bodies(bodies: BodiesLike) -> Bodies:
    return bodies if isinstance(bodies, Bodies) else Bodies.from_bodies(bodies)


def _candidate_pairs(bodies: Bodies) -> Tuple[np.ndarray, np.ndarray]:
    """
    Uniform-grid broadphase with cell size twice the largest radius.
    """
    count = len(bodies)
    if count < 2:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    cell = 2.0 * float(bodies.radius.max())
    coords = np.floor(bodies.center / cell).astype(np.int64).tolist()
    grid = defaultdict(list)
    for index, (cx, cy) in enumerate(coords):
        grid[(cx, cy)].append(index)
    first, second = [], []
    for (cx, cy), members in grid.items():
        for k, i in enumerate(members):
            for j in members[k + 1:]:
                first.append(i)
                second.append(j)
        for dx, dy in _HALF_NEIGHBOURHOOD:
            neighbours = grid.get((cx + dx, cy + dy))
            if not neighbours:
                continue
            for i in members:
                for j in neighbours:
                    first.append(min(i, j))
                    second.append(max(i, j))
    return np.asarray(first, dtype=np.int64), np.asarray(second, dtype=np.int64)


def detect_contacts(bodies: BodiesLike, walls: Sequence[WallSegment]) -> List[Contact]:
    """
    Find every overlapping circle-circle and circle-wall pair.

    Pairs of static bodies and pairs of sensors are skipped.  A contact
    involving a sensor body is reported with `sensor=True`.

    :return: contacts ordered by (lower id, higher id), wall contacts after
             the body contacts of the same body
    """
    bodies = _as_bodies(bodies)
    contacts = []
    first, second = _candidate_pairs(bodies)
    if len(first):
        static = bodies.inverse_mass == 0
        keep = ~(static[first] & static[second]) & ~(bodies.sensor[first] & bodies.sensor[second])
        first, second = first[keep], second[keep]
        delta = bodies.center[second] - bodies.center[first]
        distance = np.hypot(delta[:, 0], delta[:, 1])
        depth = bodies.radius[first] + bodies.radius[second] - distance
        for k in np.flatnonzero(depth > 0):
            i, j = int(first[k]), int(second[k])
            if distance[k] > 0:
                normal = delta[k] / distance[k]
            else:
                normal = np.array([1.0, 0.0])
            point = bodies.center[i] + normal * (bodies.radius[i] - 0.5 * depth[k])
            contacts.append(Contact(
                int(bodies.ids[i]), int(bodies.ids[j]), normal, float(depth[k]), point,
                sensor=bool(bodies.sensor[i] or bodies.sensor[j]),
            ))

    dynamic = np.flatnonzero(bodies.inverse_mass > 0)
    if len(dynamic):
        centers = bodies.center[dynamic]
        for wall_index, wall in enumerate(walls):
            closest = wall.closest_points(centers)
            delta = closest - centers
            distance = np.hypot(delta[:, 0], delta[:, 1])
            depth = bodies.radius[dynamic] - distance
            for k in np.flatnonzero(depth > 0):
                i = int(dynamic[k])
                if distance[k] > 0:
                    normal = delta[k] / distance[k]
                else:
                    normal = wall.unit_normal()
                contacts.append(Contact(
                    int(bodies.ids[i]), None, normal, float(depth[k]), closest[k].copy(),
                    wall_index=wall_index, sensor=bool(bodies.sensor[i]),
                ))

    contacts.sort(key=Contact.sort_key)
    return contacts


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def solve_velocities(bodies: BodiesLike, contacts: Sequence[Contact], config: SolverConfig) -> Bodies:
    """
    Sequential-impulse velocity solver.

    Runs `velocity_iterations` sweeps over the non-sensor contacts.  The
    accumulated normal impulse of each contact is projected onto [0, inf) and
    the accumulated friction impulse onto the friction cone.

    :return: the bodies, with velocities updated in place
    """
    bodies = _as_bodies(bodies)
    velocity = bodies.linear_velocity
    spin = bodies.angular_velocity
    prepared = []
    for contact in contacts:
        if contact.sensor:
            continue
        a = bodies.index_of(contact.body_a)
        b = None if contact.is_wall else bodies.index_of(contact.body_b)
        inv_ma, inv_ia = bodies.inverse_mass[a], bodies.inverse_inertia[a]
        inv_mb = 0.0 if b is None else bodies.inverse_mass[b]
        inv_ib = 0.0 if b is None else bodies.inverse_inertia[b]
        if inv_ma == 0 and inv_mb == 0:
            continue
        nx, ny = float(contact.normal[0]), float(contact.normal[1])
        tx, ty = -ny, nx
        rax, ray = contact.contact_point - bodies.center[a]
        if b is None:
            rbx = rby = 0.0
        else:
            rbx, rby = contact.contact_point - bodies.center[b]
        rn_a, rn_b = _cross(rax, ray, nx, ny), _cross(rbx, rby, nx, ny)
        rt_a, rt_b = _cross(rax, ray, tx, ty), _cross(rbx, rby, tx, ty)
        normal_mass = 1.0 / (inv_ma + inv_mb + inv_ia * rn_a ** 2 + inv_ib * rn_b ** 2)
        tangent_mass = 1.0 / (inv_ma + inv_mb + inv_ia * rt_a ** 2 + inv_ib * rt_b ** 2)
        relative = _relative_velocity(velocity, spin, a, b, rax, ray, rbx, rby)
        approach = relative[0] * nx + relative[1] * ny
        target = -config.restitution * approach if approach < 0 else 0.0
        prepared.append((contact, a, b, inv_ma, inv_ia, inv_mb, inv_ib, nx, ny, tx, ty,
                         rax, ray, rbx, rby, normal_mass, tangent_mass, target))

    for _ in range(config.velocity_iterations):
        for (contact, a, b, inv_ma, inv_ia, inv_mb, inv_ib, nx, ny, tx, ty,
             rax, ray, rbx, rby, normal_mass, tangent_mass, target) in prepared:
            if config.friction_coefficient > 0:
                relative = _relative_velocity(velocity, spin, a, b, rax, ray, rbx, rby)
                vt = relative[0] * tx + relative[1] * ty
                limit = config.friction_coefficient * contact.accumulated_normal_impulse
                previous = contact.accumulated_tangent_impulse
                contact.accumulated_tangent_impulse = min(max(previous - tangent_mass * vt, -limit), limit)
                _apply_impulse(velocity, spin, a, b, inv_ma, inv_ia, inv_mb, inv_ib,
                               rax, ray, rbx, rby, tx, ty,
                               contact.accumulated_tangent_impulse - previous)

            relative = _relative_velocity(velocity, spin, a, b, rax, ray, rbx, rby)
            vn = relative[0] * nx + relative[1] * ny
            previous = contact.accumulated_normal_impulse
            contact.accumulated_normal_impulse = max(previous + normal_mass * (target - vn), 0.0)
            _apply_impulse(velocity, spin, a, b, inv_ma, inv_ia, inv_mb, inv_ib,
                           rax, ray, rbx, rby, nx, ny,
                           contact.accumulated_normal_impulse - previous)
    return bodies


def _relative_velocity(velocity, spin, a, b, rax, ray, rbx, rby):
    # velocity of the contact point on b minus that on a
    vax = velocity[a, 0] - spin[a] * ray
    vay = velocity[a, 1] + spin[a] * rax
    if b is None:
        return -vax, -vay
    vbx = velocity[b, 0] - spin[b] * rby
    vby = velocity[b, 1] + spin[b] * rbx
    return vbx - vax, vby - vay


def _apply_impulse(velocity, spin, a, b, inv_ma, inv_ia, inv_mb, inv_ib,
                   rax, ray, rbx, rby, dx, dy, magnitude):
    if magnitude == 0.0:
        return
    px, py = magnitude * dx, magnitude * dy
    velocity[a, 0] -= inv_ma * px
    velocity[a, 1] -= inv_ma * py
    spin[a] -= inv_ia * _cross(rax, ray, px, py)
    if b is not None:
        velocity[b, 0] += inv_mb * px
        velocity[b, 1] += inv_mb * py
        spin[b] += inv_ib * _cross(rbx, rby, px, py)


def _current_separation(bodies: Bodies, contact: Contact, walls):
    a = bodies.index_of(contact.body_a)
    if contact.is_wall:
        if walls is None or contact.wall_index is None:
            # flat-wall approximation around the detected contact point
            gap = float((contact.contact_point - bodies.center[a]) @ contact.normal)
            return a, None, contact.normal, float(bodies.radius[a] - gap)
        closest = walls[contact.wall_index].closest_points(bodies.center[a][None, :])[0]
        delta = closest - bodies.center[a]
        distance = math.hypot(*delta)
        normal = delta / distance if distance > 0 else contact.normal
        return a, None, normal, float(bodies.radius[a] - distance)
    b = bodies.index_of(contact.body_b)
    delta = bodies.center[b] - bodies.center[a]
    distance = math.hypot(*delta)
    normal = delta / distance if distance > 0 else contact.normal
    return a, b, normal, float(bodies.radius[a] + bodies.radius[b] - distance)


def _position_sweep(bodies: Bodies, contacts, config: SolverConfig, factor: float, walls) -> float:
    worst = 0.0
    for contact in contacts:
        if contact.sensor:
            continue
        a, b, normal, depth = _current_separation(bodies, contact, walls)
        inv_ma = bodies.inverse_mass[a]
        inv_mb = 0.0 if b is None else bodies.inverse_mass[b]
        if inv_ma == 0 and inv_mb == 0:
            continue
        excess = depth - config.penetration_slop
        worst = max(worst, excess)
        if excess <= 0:
            continue
        magnitude = factor * excess / (inv_ma + inv_mb)
        bodies.center[a] -= inv_ma * magnitude * normal
        if b is not None:
            bodies.center[b] += inv_mb * magnitude * normal
    return worst


def correct_positions(bodies: BodiesLike, contacts: Sequence[Contact], config: SolverConfig,
                      walls: Optional[Sequence[WallSegment]] = None) -> Bodies:
    """
    Remove residual penetration beyond the slop.

    `position_iterations` relaxed sweeps move each pair apart by
    `position_correction_factor` of its excess penetration, re-measured from
    the current positions.  Full-strength finishing sweeps then run until no
    contact exceeds the slop (at most `finishing_sweeps` of them).  When the
    walls are given, the finishing sweeps re-detect contacts, so overlaps
    created by the correction itself are resolved as well.

    :return: the bodies, with centers updated in place
    """
    bodies = _as_bodies(bodies)
    for _ in range(config.position_iterations):
        _position_sweep(bodies, contacts, config, config.position_correction_factor, walls)
    for _ in range(config.finishing_sweeps):
        if walls is not None:
            contacts = detect_contacts(bodies, walls)
        if _position_sweep(bodies, contacts, config, 1.0, walls) <= 1e-9:
            break
    return bodies


def integrate(bodies: BodiesLike, external_forces: Union[Mapping[int, Sequence[float]], np.ndarray, None],
              dt: float, torques: Union[Mapping[int, float], np.ndarray, None] = None,
              linear_damping: float = 0.0, angular_damping: float = 0.0) -> Bodies:
    """
    Semi-implicit Euler step: velocities first, then positions.

    :param external_forces: forces by body id, or an (n, 2) array aligned with the bodies
    :param dt: the time step (must be positive)
    :param torques: optional torques by body id, or an (n,) array
    :param linear_damping: implicit damping, v <- v / (1 + dt * damping)
    :param angular_damping: same for the angular velocity
    :return: the bodies, updated in place
    """
    if dt <= 0:
        raise ValueError(f'dt must be positive, got {dt}')
    bodies = _as_bodies(bodies)
    forces = _aligned(bodies, external_forces, (len(bodies), 2))
    torque = _aligned(bodies, torques, (len(bodies),))
    dynamic = bodies.inverse_mass > 0
    velocity = bodies.linear_velocity
    velocity[dynamic] += dt * bodies.inverse_mass[dynamic, None] * forces[dynamic]
    bodies.angular_velocity[dynamic] += dt * bodies.inverse_inertia[dynamic] * torque[dynamic]
    if linear_damping:
        velocity[dynamic] /= 1.0 + dt * linear_damping
    if angular_damping:
        bodies.angular_velocity[dynamic] /= 1.0 + dt * angular_damping
    bodies.center[dynamic] += dt * velocity[dynamic]
    bodies.orientation[dynamic] = wrap_angle(
        bodies.orientation[dynamic] + dt * bodies.angular_velocity[dynamic])
    return bodies


def _aligned(bodies: Bodies, values, shape) -> np.ndarray:
    if values is None:
        return np.zeros(shape)
    if isinstance(values, np.ndarray):
        return values.reshape(shape)
    result = np.zeros(shape)
    for body_id, value in values.items():
        result[bodies.index_of(body_id)] = value
    return result


def step_bodies(bodies: Bodies, walls: Sequence[WallSegment], forces, torques,
                config: SolverConfig, dt: float = 1.0,
                linear_damping: float = 0.0, angular_damping: float = 0.0) -> List[Contact]:
    """
    One full physics step: integrate, detect, solve velocities, correct positions.

    :return: the contacts detected after integration
    """
    integrate(bodies, forces, dt, torques, linear_damping, angular_damping)
    contacts = detect_contacts(bodies, walls)
    solve_velocities(bodies, contacts, config)
    correct_positions(bodies, contacts, config, walls)
    return contacts


def _ray_hits(origins: np.ndarray, directions: np.ndarray, max_range: float,
              bodies: Bodies, walls: Sequence[WallSegment], exclude: Optional[int]):
    # origins, directions: (k, 2); returns (k,) distance, kind, id with inf / -1 for misses
    rays = len(directions)
    best = np.full(rays, np.inf)
    kinds = np.full(rays, -1, dtype=np.int64)
    ids = np.full(rays, -1, dtype=np.int64)

    if len(bodies):
        offset = origins[:, None, :] - bodies.center[None, :, :]
        b = np.einsum('kd,knd->kn', directions, offset)
        c = np.einsum('knd,knd->kn', offset, offset) - bodies.radius[None, :] ** 2
        disc = b * b - c
        inside = c <= 0
        with np.errstate(invalid='ignore'):
            t = -b - np.sqrt(np.where(disc >= 0, disc, 0.0))
        t = np.where(inside, 0.0, t)
        valid = (disc >= 0) & (inside | (t >= 0))
        if exclude is not None:
            valid &= (bodies.ids != exclude)[None, :]
        t = np.where(valid, t, np.inf)
        nearest = np.argmin(t, axis=1)
        nearest_t = t[np.arange(rays), nearest]
        hit = nearest_t <= max_range
        best[hit] = nearest_t[hit]
        kinds[hit] = bodies.kind[nearest[hit]]
        ids[hit] = bodies.ids[nearest[hit]]

    for wall_index, wall in enumerate(walls):
        start = np.asarray(wall.start, dtype=np.float64)
        edge = np.asarray(wall.end, dtype=np.float64) - start
        denom = directions[:, 0] * edge[1] - directions[:, 1] * edge[0]
        to_start = start[None, :] - origins
        with np.errstate(divide='ignore', invalid='ignore'):
            t = (to_start[:, 0] * edge[1] - to_start[:, 1] * edge[0]) / denom
            u = (to_start[:, 0] * directions[:, 1] - to_start[:, 1] * directions[:, 0]) / denom
        valid = (np.abs(denom) > 1e-12) & (t >= 0) & (u >= 0) & (u <= 1) & (t <= max_range)
        closer = valid & (t < best)
        best[closer] = t[closer]
        kinds[closer] = WALL_KIND
        ids[closer] = wall_index
    return best, kinds, ids


def raycast(origin: Sequence[float], direction: Sequence[float], max_range: float,
            bodies: BodiesLike, walls: Sequence[WallSegment],
            exclude: Optional[int] = None) -> Optional[Tuple[float, int, int]]:
    """
    Nearest intersection of a ray with the bodies and walls.

    An origin inside a circle hits it at distance 0.  Ties go to the body with
    the lowest id, and bodies win ties against walls.

    :param direction: a unit vector
    :param exclude: an optional body id ignored by the ray (the caster itself)
    :return: (distance, kind, id) or None when nothing lies within max_range;
             walls report `WALL_KIND` and their index as id
    """
    if max_range <= 0:
        raise ValueError(f'max_range must be positive, got {max_range}')
    distance, kind, object_id = _ray_hits(
        np.asarray(origin, dtype=np.float64)[None, :], np.asarray(direction, dtype=np.float64)[None, :],
        max_range, _as_bodies(bodies), walls, exclude)
    if not np.isfinite(distance[0]):
        return None
    return float(distance[0]), int(kind[0]), int(object_id[0])


def raycast_fan(origin: np.ndarray, heading: float, angles: np.ndarray, max_range: float,
                bodies: Bodies, walls: Sequence[WallSegment], exclude: Optional[int] = None):
    """
    Cast one ray per relative angle around a heading.

    :return: (distances, kinds, ids) arrays; misses have distance inf and kind -1
    """
    absolute = heading + np.asarray(angles, dtype=np.float64)
    directions = np.stack([np.cos(absolute), np.sin(absolute)], axis=1)
    origins = np.repeat(np.asarray(origin, dtype=np.float64)[None, :], len(directions), axis=0)
    return _ray_hits(origins, directions, max_range, bodies, walls, exclude)
