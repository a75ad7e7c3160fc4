from .model import Book


class Catalog:
    """Keeps books keyed by id."""

    def __init__(self, path=None):
        self.path = path
        self._rows = {}
        self.dirty = False

    def iter_books(self):
        """Iterates over every stored book."""
        for key in sorted(self._rows):
            yield self._rows[key]

    def get_book(self, key) -> Book:
        """Returns the book stored under the given key."""
        return self._rows.get(key)

    def find_books_by_branch(self, branch):
        """Returns the books that belong to one branch."""
        return [r for r in self.iter_books() if r.branch == branch]

    def add_book(self, book: Book):
        """Stores a book, replacing any older copy."""
        self._rows[book.key] = book
        self.dirty = True

    def remove_book(self, key):
        """Drops a book if present."""
        self._rows.pop(key, None)
        self.dirty = True

    def count_books(self):
        """Number of stored books."""
        return len(self._rows)

    def latest_book(self) -> Book:
        """Returns the most recently stored book."""
        keys = sorted(self._rows)
        return self._rows[keys[-1]] if keys else None
