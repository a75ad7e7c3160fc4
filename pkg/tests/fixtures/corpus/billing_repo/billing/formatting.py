MAX_WIDTH = 80


class BillingFormatter:
    """Turns customer invoices figures into text."""

    def __init__(self, width=MAX_WIDTH):
        self.width = width

    def format_outstanding_balance(self, rows):
        """Format outstanding balance of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def render_late_fees(self, rows):
        """Render late fees of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def describe_revenue(self, rows):
        """Describe revenue of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def print_tax_totals(self, rows):
        """Print tax totals of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def label_refunds(self, rows):
        """Label refunds of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def format_payment_delays(self, rows):
        """Format payment delays of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def render_credit_notes(self, rows):
        """Render credit notes of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]

    def describe_discount_usage(self, rows):
        """Describe discount usage of the invoices for a customer."""
        text = ', '.join(str(r) for r in rows)
        return text[:MAX_WIDTH]
