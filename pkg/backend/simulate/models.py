from django.db import models

from indices.utils import CH_FORMULAS, CH_STANDARD, DEFAULT_DISPERSION_POWER, DISPERSION_POWERS


class Study(models.Model):
    """A persisted simulation study and its tallies"""
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('processing', 'Processing'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    # Parameters
    scenario = models.CharField(max_length=100)
    spec = models.JSONField(default=dict, help_text='Scenario the study samples from')
    methods = models.JSONField(default=list)
    replications = models.PositiveIntegerField(default=100)
    k_max = models.PositiveIntegerField(default=10)
    seed = models.BigIntegerField(default=0)
    bootstraps = models.PositiveIntegerField(default=100)
    threshold = models.FloatField(default=0.1)
    ch_formula = models.CharField(max_length=20, choices=[(f, f) for f in CH_FORMULAS], default=CH_STANDARD)
    gap_d_power = models.PositiveSmallIntegerField(
        choices=[(p, str(p)) for p in DISPERSION_POWERS], default=DEFAULT_DISPERSION_POWER,
    )

    # Results, keyed by method label
    tallies = models.JSONField(default=dict, blank=True)
    failures = models.JSONField(default=dict, blank=True)

    # Metadata
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    # Processing status
    processing_status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='pending')
    processing_error = models.TextField(blank=True, null=True)

    class Meta:
        verbose_name_plural = "Studies"
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['scenario', 'processing_status'], name='simulate_scenario_status_idx'),
        ]

    def __str__(self):
        return f"{self.scenario} (R={self.replications}, seed={self.seed})"
