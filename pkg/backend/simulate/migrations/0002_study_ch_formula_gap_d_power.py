from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('simulate', '0001_initial'),
    ]

    operations = [
        migrations.AddField(
            model_name='study',
            name='ch_formula',
            field=models.CharField(choices=[('standard', 'standard'), ('as-printed', 'as-printed')], default='standard', max_length=20),
        ),
        migrations.AddField(
            model_name='study',
            name='gap_d_power',
            field=models.PositiveSmallIntegerField(choices=[(1, '1'), (2, '2')], default=1),
        ),
    ]
