MAX_WIDTH = 80


class InventoryFormatter:
    """Turns warehouse items figures into text."""

    def __init__(self, width=MAX_WIDTH):
        self.width = width

    def format_stock_levels(self, rows):
        """Format stock levels of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def render_reorder_points(self, rows):
        """Render reorder points of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def describe_shrinkage(self, rows):
        """Describe shrinkage of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def print_turnover(self, rows):
        """Print turnover of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def label_aging_stock(self, rows):
        """Label aging stock of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def format_supplier_fill_rate(self, rows):
        """Format supplier fill rate of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def render_dead_stock(self, rows):
        """Render dead stock of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def describe_cycle_counts(self, rows):
        """Describe cycle counts of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def print_backorders(self, rows):
        """Print backorders of the items for a warehouse."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]
