from .model import Shipment


class RouteTable:
    """Keeps shipments keyed by id."""

    def __init__(self, path=None):
        self.path = path
        self._rows = {}
        self.dirty = False

    def iter_shipments(self):
        """Iterates over every stored shipment."""
        for key in sorted(self._rows):
            yield self._rows[key]

    def get_shipment(self, key) -> Shipment:
        """Returns the shipment stored under the given key."""
        return self._rows.get(key)

    def find_shipments_by_depot(self, depot):
        """Returns the shipments that belong to one depot."""
        return [r for r in self.iter_shipments() if r.depot == depot]

    def add_shipment(self, shipment: Shipment):
        """Stores a shipment, replacing any older copy."""
        self._rows[shipment.key] = shipment
        self.dirty = True

    def remove_shipment(self, key):
        """Drops a shipment if present."""
        self._rows.pop(key, None)
        self.dirty = True

    def count_shipments(self):
        """Number of stored shipments."""
        return len(self._rows)

    def latest_shipment(self) -> Shipment:
        """Returns the most recently stored shipment."""
        keys = sorted(self._rows)
        return self._rows[keys[-1]] if keys else None
