MAX_WIDTH = 80


class LoanFormatter:
    """Turns branch books figures into text."""

    def __init__(self, width=MAX_WIDTH):
        self.width = width

    def format_overdue_loans(self, rows):
        """Format overdue loans of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def render_popular_titles(self, rows):
        """Render popular titles of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def describe_hold_queue(self, rows):
        """Describe hold queue of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def print_lost_copies(self, rows):
        """Print lost copies of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def label_renewal_counts(self, rows):
        """Label renewal counts of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def format_branch_transfers(self, rows):
        """Format branch transfers of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def render_reading_trends(self, rows):
        """Render reading trends of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def describe_fines(self, rows):
        """Describe fines of the books for a branch."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]
