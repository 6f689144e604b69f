# Copyright 2026 The rewardevo authors
# This work is licensed under the GNU GPLv3 or later.
# See the COPYING file in the top-level directory.

import math

import numpy as np


class ConfigError(ValueError):
    """
    Raised when a simulation or experiment configuration is invalid.
    The message names the offending dotted key whenever one is known.
    """


def require(condition: bool, message: str):
    """
    Raise a `ConfigError` with the given message unless the condition holds.

    :param condition: the invariant to check
    :param message: the error message (should name the key at fault)
    """
    if not condition:
        raise ConfigError(message)


def wrap_angle(angle):
    """
    Normalize an angle (or an array of angles) to [-pi, pi).

    :param angle: radians, scalar or numpy array
    :return: the wrapped angle(s), same shape as the input
    """
    return np.mod(np.asarray(angle) + math.pi, 2.0 * math.pi) - math.pi


def heading_vector(angle: float) -> np.ndarray:
    return np.array([math.cos(angle), math.sin(angle)])


def bearing(center: np.ndarray, orientation: float, point: np.ndarray) -> float:
    """
    Bearing of a point seen from a body, relative to the body heading.

    :return: radians in [-pi, pi), positive to the left of the heading
    """
    delta = point - center
    return float(wrap_angle(math.atan2(delta[1], delta[0]) - orientation))
