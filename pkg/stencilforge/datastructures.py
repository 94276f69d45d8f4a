import logging


log = logging.getLogger(__name__)


class DuplicateName(ValueError):
    pass


class UnknownSymbol(LookupError):
    pass


class OrderedAttributes(object):
    """Mapping that keeps insertion order and exposes keys as attributes."""

    def __init__(self, data=None):
        self._dict = {}
        self._keys = []

        if data:
            for k, v in data:
                self[k] = v

    def __setitem__(self, key, value):
        if key not in self._dict:
            self._keys.append(key)
        self._dict[key] = value

    def __getitem__(self, key):
        return self._dict[key]

    def __delitem__(self, key):
        del self._dict[key]
        self._keys.remove(key)

    def __getattr__(self, key):
        if key.startswith('_'):
            raise AttributeError(key)
        try:
            return self[key]
        except KeyError:
            raise AttributeError("Has no attribute '%s'" % key)

    def __contains__(self, key):
        return key in self._dict

    def get(self, key, default=None):
        try:
            return self[key]
        except KeyError:
            return default

    def keys(self):
        return iter(self._keys)

    def values(self):
        return (self._dict[k] for k in self._keys)

    def items(self):
        return ((k, self._dict[k]) for k in self._keys)

    def __iter__(self):
        return self.values()

    def __len__(self):
        return len(self._dict)


class SymbolRegistry(OrderedAttributes):
    """Maps function names onto the data functions that own them.

    Declaration order is kept: generated kernels take their buffers in
    the order functions were registered.
    """

    def register(self, function):
        name = function.name
        if name in self:
            raise DuplicateName(
                'Function name already registered: {!r}'.format(name)
            )
        log.debug('Registering function %r', name)
        self[name] = function
        return function

    def unregister(self, name):
        if name in self:
            del self[name]

    def lookup(self, name):
        try:
            return self[name]
        except KeyError:
            raise UnknownSymbol('Unknown function: {!r}'.format(name))

    def index_of(self, name):
        return self._keys.index(name)

    def clear(self):
        self._dict.clear()
        del self._keys[:]


default_registry = SymbolRegistry()
