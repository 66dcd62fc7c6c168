from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='Study',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scenario', models.CharField(max_length=100)),
                ('spec', models.JSONField(default=dict, help_text='Scenario the study samples from')),
                ('methods', models.JSONField(default=list)),
                ('replications', models.PositiveIntegerField(default=100)),
                ('k_max', models.PositiveIntegerField(default=10)),
                ('seed', models.BigIntegerField(default=0)),
                ('bootstraps', models.PositiveIntegerField(default=100)),
                ('threshold', models.FloatField(default=0.1)),
                ('tallies', models.JSONField(blank=True, default=dict)),
                ('failures', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('processing_status', models.CharField(choices=[('pending', 'Pending'), ('processing', 'Processing'), ('completed', 'Completed'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('processing_error', models.TextField(blank=True, null=True)),
            ],
            options={
                'verbose_name_plural': 'Studies',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['scenario', 'processing_status'], name='simulate_scenario_status_idx')],
            },
        ),
    ]
