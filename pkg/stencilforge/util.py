from fractions import Fraction
from functools import wraps
from itertools import chain
import numbers

import numpy as np


def _with_clone(fn):
    @wraps(fn)
    def wrapper(self, *args, **kwargs):
        clone = self.clone()
        res = fn(clone, *args, **kwargs)
        if res is not None:
            return res
        return clone
    return wrapper


class cached_property(object):
    def __init__(self, func):
        self.func = func

    def __get__(self, instance, type=None):
        if instance is None:
            return self

        res = instance.__dict__[self.func.__name__] = self.func(instance)
        return res


def clean_params(params, **kwargs):
    return {
        p: v for p, v in chain(params.items(), kwargs.items())
        if v is not None
    }


def to_fraction(value):
    """Converts a number into an exact :class:`fractions.Fraction`.

    Floats are taken by their shortest decimal representation so ``0.1``
    becomes ``1/10`` rather than the nearest binary fraction.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (bool, np.bool_)):
        raise TypeError('Boolean is not a number: {!r}'.format(value))
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Real):
        return Fraction(repr(float(value)))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError('Cannot convert to fraction: {!r}'.format(value))


def as_tuple(value):
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def prod(values):
    res = 1
    for v in values:
        res *= v
    return res
