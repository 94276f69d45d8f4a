import ctypes
import inspect

import numpy as np


def instantiate(typeobj, *args, **kwargs):
    if inspect.isclass(typeobj):
        return typeobj(*args, **kwargs)
    return typeobj


class ValidationError(ValueError):
    pass


class Type(object):
    """Element type of a data buffer.

    Binds together the numpy dtype used for storage, the C type used by
    generated kernels and the literal suffix for constants.
    """
    dtype = None
    ctype = None
    ctypes_type = None
    literal_suffix = ''

    @property
    def itemsize(self):
        return np.dtype(self.dtype).itemsize

    @property
    def is_float(self):
        return np.issubdtype(np.dtype(self.dtype), np.floating)

    def to_python(self, value):
        if value is None:
            return None
        return value

    def from_python(self, value, validate=False):
        return value

    def format_literal(self, value):
        raise NotImplementedError()

    def __eq__(self, other):
        return type(self) is type(other)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.__visit_name__)

    def __repr__(self):
        return '<{}>'.format(self.__class__.__name__)


class _Float(Type):
    def to_python(self, value):
        if value is None:
            return None
        return float(value)

    def from_python(self, value, validate=False):
        if validate:
            try:
                value = float(value)
            except (ValueError, TypeError):
                raise ValidationError(
                    'Cannot parse value as float: {!r}'.format(value)
                )
            with np.errstate(over='ignore'):
                res = self.dtype(value)
            if not np.isfinite(res):
                raise ValidationError(
                    'Value must be finite in {}: {!r}'.format(
                        self.__visit_name__, value
                    )
                )
            return res
        return self.dtype(value)

    def format_literal(self, value):
        value = self.from_python(value, validate=True)
        # numpy prints the shortest string that round-trips in this precision
        return '{}{}'.format(str(value), self.literal_suffix)


class Float32(_Float):
    __visit_name__ = 'float'

    dtype = np.float32
    ctype = 'float'
    ctypes_type = ctypes.c_float
    literal_suffix = 'F'


class Float64(_Float):
    __visit_name__ = 'double'

    dtype = np.float64
    ctype = 'double'
    ctypes_type = ctypes.c_double


class Int32(Type):
    __visit_name__ = 'int'

    dtype = np.int32
    ctype = 'int'
    ctypes_type = ctypes.c_int

    MIN_VALUE = -(1 << 31)
    MAX_VALUE = (1 << 31) - 1

    def to_python(self, value):
        if value is None:
            return None
        return int(value)

    def from_python(self, value, validate=False):
        if validate:
            try:
                value = int(value)
            except (ValueError, TypeError):
                raise ValidationError(
                    'Cannot parse value as integer: {!r}'.format(value)
                )
            if value < self.MIN_VALUE or value > self.MAX_VALUE:
                raise ValidationError(
                    'Value must be in range: {} not in [{}, {}]'.format(
                        value, self.MIN_VALUE, self.MAX_VALUE
                    )
                )
        return self.dtype(value)

    def format_literal(self, value):
        return str(self.from_python(value, validate=True))


ELEMENT_TYPES = {
    'f32': Float32,
    'float32': Float32,
    'float': Float32,
    'f64': Float64,
    'float64': Float64,
    'double': Float64,
    'i32': Int32,
    'int32': Int32,
    'int': Int32,
}


def get_type(typeobj):
    """Resolves an element type from a name, a numpy dtype or a type class.

    >>> get_type('f32')
    <Float32>
    >>> get_type(np.float64)
    <Float64>
    """
    if isinstance(typeobj, Type):
        return typeobj
    if inspect.isclass(typeobj) and issubclass(typeobj, Type):
        return instantiate(typeobj)
    if isinstance(typeobj, str):
        if typeobj not in ELEMENT_TYPES:
            raise ValidationError(
                'Unknown element type: {!r}'.format(typeobj)
            )
        return instantiate(ELEMENT_TYPES[typeobj])
    try:
        dtype = np.dtype(typeobj)
    except TypeError:
        raise ValidationError('Unknown element type: {!r}'.format(typeobj))
    for type_cls in (Float32, Float64, Int32):
        if np.dtype(type_cls.dtype) == dtype:
            return type_cls()
    raise ValidationError('Unsupported element type: {!r}'.format(typeobj))
